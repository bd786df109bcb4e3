// Command-line front end: run sweeps, verify the analytic guarantees at
// runtime, fuzz the packet codec, and drive a live edge/cloud pair over TCP.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 a verified bound
// failed to hold, 3 I/O or protocol failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sqs/carrier.hpp"
#include "sqs/conformal.hpp"
#include "sqs/errors.hpp"
#include "sqs/experiment.hpp"
#include "sqs/packets.hpp"
#include "sqs/ranking.hpp"
#include "sqs/rng.hpp"
#include "sqs/session.hpp"
#include "sqs/trace.hpp"

namespace {

using namespace sqs;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBound = 2;
constexpr int kExitIo = 3;

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "k-sqs") return Scheme::KSqs;
  if (name == "c-sqs") return Scheme::CSqs;
  if (name == "qs-dense") return Scheme::QsDense;
  throw ConfigError("unknown scheme '" + name + "' (expected k-sqs, c-sqs, or qs-dense)");
}

std::unique_ptr<ModelPair> model_for(const ExperimentConfig& config) {
  if (!config.trace_path.empty()) return trace_pair(config.trace_path);
  return synthetic_pair(config.model);
}

// Shared session-endpoint options: both processes must be launched with the
// same config file and the same overrides for the transcript to verify.
struct EndpointOptions {
  std::string config_path;
  std::string address;
  std::string scheme_name;
  std::uint32_t top_k = 0;
  double temperature = 1.0;
  std::uint32_t batches = 16;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_endpoint_options(CLI::App* cmd, EndpointOptions& opts, const char* address_flag,
                          const char* address_help) {
  cmd->add_option("--config", opts.config_path, "Experiment config file")->required();
  cmd->add_option(address_flag, opts.address, address_help)->required();
  cmd->add_option("--scheme", opts.scheme_name,
                  "Scheme override: k-sqs, c-sqs, qs-dense (default: first in config)");
  cmd->add_option("--top-k", opts.top_k,
                  "Support size for the fixed-cardinality scheme (default: first of k_grid)");
  cmd->add_option("--temperature", opts.temperature, "Sampling temperature for both models")
      ->capture_default_str();
  cmd->add_option("--batches", opts.batches, "Number of draft/verdict exchanges")
      ->capture_default_str();
  auto* seed = cmd->add_option("--seed", opts.seed, "Session seed (default: config seed_base)");
  cmd->final_callback([&opts, seed] { opts.seed_set = seed->count() > 0; });
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw ConfigError("address '" + address + "' must look like host:port");
  }
  const std::string host = address.substr(0, colon);
  const std::string port_text = address.substr(colon + 1);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ConfigError("cannot parse port '" + port_text + "'");
  }
  if (port == 0 || port > 0xFFFF) throw ConfigError("port must lie in [1, 65535]");
  return {host, static_cast<std::uint16_t>(port)};
}

SessionConfig session_from(const ExperimentConfig& config, const EndpointOptions& opts,
                           std::uint32_t vocab) {
  Scheme scheme =
      opts.scheme_name.empty() ? config.schemes.front() : scheme_from_name(opts.scheme_name);
  std::uint32_t top_k = opts.top_k;
  if (top_k == 0) {
    if (scheme == Scheme::KSqs) {
      top_k = config.k_grid.empty() ? 8 : config.k_grid.front();
    } else if (scheme == Scheme::QsDense) {
      top_k = vocab;
    }
  }
  SessionConfig session;
  session.draft.scheme = scheme;
  session.draft.top_k = top_k;
  session.draft.resolution = config.resolution;
  session.draft.budget_bits = config.budget_bits;
  session.draft.l_max = config.l_max;
  session.draft.charge_token_bits = config.charge_token_bits;
  session.alpha = config.alpha;
  session.eta = config.eta;
  session.beta_initial = config.beta_initial_effective(vocab);
  session.batches = opts.batches;
  session.seed = opts.seed_set ? opts.seed : config.seed_base;
  return session;
}

void print_session_summary(const SessionResult& result) {
  std::uint64_t drafted = 0;
  std::uint64_t accepted = 0;
  std::uint64_t resampled = 0;
  double bits = 0.0;
  for (const BatchRecord& rec : result.batches) {
    drafted += rec.drafted;
    accepted += rec.accepted;
    resampled += rec.rejected_resampled ? 1 : 0;
    bits += rec.bits_used;
  }
  std::cout << "batches: " << result.batches.size() << "\n"
            << "tokens emitted: " << result.tokens.size() << "\n"
            << "drafted: " << drafted << "  accepted: " << accepted
            << "  resampled: " << resampled << "\n"
            << "budget bits total: " << fmt(bits) << "\n"
            << "transcript frames: " << result.transcript.size() << "\n"
            << "transcript hash: " << std::hex << result.transcript_hash << std::dec << "\n";
}

int cmd_run(const std::string& config_path, const std::string& out_path) {
  const ExperimentConfig config = load_config(config_path);
  const std::vector<ResultRow> rows = run_experiment(config);
  if (out_path.empty()) {
    std::cout << render_csv(rows, config);
  } else {
    emit_csv(rows, config, out_path);
    std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_verify_bounds(const std::string& config_path, std::uint32_t runs,
                      std::uint32_t batches) {
  ExperimentConfig config = load_config(config_path);
  config.runtime_checks = true;  // per-batch budget/distortion/threshold monitors
  bool all_hold = true;

  std::unique_ptr<ModelPair> model = model_for(config);
  const std::uint32_t vocab = model->vocab_size();

  // Rejection budget: realized resample count against the per-trajectory
  // analytic budget, averaged over independent runs.
  for (Scheme scheme : config.schemes) {
    std::vector<std::uint32_t> k_points;
    if (scheme == Scheme::KSqs) {
      k_points = config.k_grid;
    } else if (scheme == Scheme::QsDense) {
      k_points = {vocab};
    } else {
      k_points = {0};
    }
    for (std::uint32_t k : k_points) {
      for (double temperature : config.temperatures) {
        const RejectionBudgetResult r =
            evaluate_rejection_budget(config, scheme, k, temperature, runs, batches);
        const bool ok = r.holds;
        all_hold = all_hold && ok;
        std::cout << (ok ? "PASS" : "FAIL") << " rejection-budget scheme="
                  << scheme_name(scheme) << " k=" << k << " T=" << fmt(temperature)
                  << " mean_rejections=" << fmt(r.mean_rejections)
                  << " budget=" << fmt(r.mean_rhs)
                  << " stderr=" << fmt(r.stderr_rejections) << "\n";
      }
    }
  }

  // Adaptive-threshold guarantee: committed average dropped mass against
  // its ceiling, one run per seed.
  const bool has_adaptive =
      std::find(config.schemes.begin(), config.schemes.end(), Scheme::CSqs) !=
      config.schemes.end();
  if (has_adaptive && config.eta > 0.0) {
    for (double temperature : config.temperatures) {
      model->temperature_draft = temperature;
      model->temperature_target = temperature;
      for (std::uint32_t s = 0; s < config.seeds; ++s) {
        SessionConfig session;
        session.draft.scheme = Scheme::CSqs;
        session.draft.resolution = config.resolution;
        session.draft.budget_bits = config.budget_bits;
        session.draft.l_max = config.l_max;
        session.draft.charge_token_bits = config.charge_token_bits;
        session.alpha = config.alpha;
        session.eta = config.eta;
        session.beta_initial = config.beta_initial_effective(vocab);
        session.seed = config.seed_base + s;
        const RunMetrics m = run_single(*model, session, config.latency, config.channel,
                                        config.tokens_per_run, true);
        const bool ok =
            m.conformal_steps == 0.0 || m.conformal_avg_dropped <= m.dropped_ceiling_rhs;
        all_hold = all_hold && ok;
        std::cout << (ok ? "PASS" : "FAIL") << " dropped-mass-ceiling T=" << fmt(temperature)
                  << " seed=" << session.seed
                  << " avg_dropped=" << fmt(m.conformal_avg_dropped)
                  << " ceiling=" << fmt(m.dropped_ceiling_rhs) << " steps=" << fmt(m.conformal_steps)
                  << "\n";
      }
    }
  }

  std::cout << (all_hold ? "ALL BOUNDS HOLD" : "BOUND VIOLATION") << "\n";
  return all_hold ? kExitOk : kExitBound;
}

int cmd_codec_test(std::uint64_t trials, std::uint64_t seed,
                   std::vector<std::uint32_t> vocab_sizes) {
  if (vocab_sizes.empty()) vocab_sizes = {8, 64, 512};
  CounterRng rng(seed, 0xC0DEC);
  std::uint64_t done = 0;
  for (std::uint32_t vocab : vocab_sizes) {
    for (Scheme scheme : {Scheme::KSqs, Scheme::CSqs, Scheme::QsDense}) {
      const std::uint64_t per_cell =
          std::max<std::uint64_t>(1, trials / (vocab_sizes.size() * 3));
      for (std::uint64_t t = 0; t < per_cell; ++t) {
        WireParams params;
        params.scheme = scheme;
        params.vocab_size = vocab;
        params.resolution = 1 + static_cast<std::uint32_t>(rng.next_u64() % 400);

        DraftPacket packet;
        packet.batch_id = static_cast<std::uint32_t>(rng.next_u64());
        const std::uint32_t max_k = std::min<std::uint32_t>(vocab, 24);
        std::uint32_t fixed_k = 1 + static_cast<std::uint32_t>(rng.next_u64() % max_k);
        if (scheme == Scheme::QsDense) fixed_k = vocab > 24 ? 0 : vocab;
        if (fixed_k == 0) {  // dense scheme on a large vocabulary: skip
          continue;
        }
        params.top_k = scheme == Scheme::KSqs ? fixed_k : 0;
        const std::uint32_t count = static_cast<std::uint32_t>(rng.next_u64() % 5);
        for (std::uint32_t i = 0; i < count; ++i) {
          const std::uint32_t k = scheme == Scheme::CSqs
                                      ? 1 + static_cast<std::uint32_t>(rng.next_u64() % max_k)
                                      : fixed_k;
          WireDraftToken token;
          token.dist.resolution = params.resolution;
          // Random K-subset of the vocabulary: Fisher-Yates prefix.
          std::vector<TokenId> ids(vocab);
          for (std::uint32_t v = 0; v < vocab; ++v) ids[v] = v;
          for (std::uint32_t v = 0; v < k; ++v) {
            const std::uint32_t j =
                v + static_cast<std::uint32_t>(rng.next_u64() % (vocab - v));
            std::swap(ids[v], ids[j]);
          }
          token.dist.support.assign(ids.begin(), ids.begin() + k);
          std::sort(token.dist.support.begin(), token.dist.support.end());
          // Random lattice point: unrank a uniform composition index.
          const BigInt space = binomial(params.resolution + k - 1, k - 1);
          BigInt rank = 0;
          for (int word = 0; word < 5; ++word) rank = (rank << 64) | rng.next_u64();
          rank %= space;
          token.dist.counts = unrank_composition(rank, k, params.resolution);
          // Token: any support position with positive mass.
          std::vector<std::uint32_t> positive;
          for (std::uint32_t i2 = 0; i2 < k; ++i2) {
            if (token.dist.counts[i2] > 0) positive.push_back(i2);
          }
          const std::uint32_t pick =
              positive[static_cast<std::uint32_t>(rng.next_u64() % positive.size())];
          token.token_id = token.dist.support[pick];
          packet.tokens.push_back(std::move(token));
        }

        const std::vector<std::uint8_t> bytes = encode_draft(packet, params);
        const DraftPacket back = decode_draft(bytes, params);
        bool same = back.batch_id == packet.batch_id &&
                    back.tokens.size() == packet.tokens.size();
        for (std::size_t i = 0; same && i < packet.tokens.size(); ++i) {
          same = back.tokens[i].token_id == packet.tokens[i].token_id &&
                 back.tokens[i].dist.support == packet.tokens[i].dist.support &&
                 back.tokens[i].dist.counts == packet.tokens[i].dist.counts &&
                 back.tokens[i].dist.resolution == packet.tokens[i].dist.resolution;
        }
        if (!same) {
          std::cout << "FAIL codec roundtrip scheme=" << scheme_name(scheme)
                    << " vocab=" << vocab << " resolution=" << params.resolution
                    << " tokens=" << packet.tokens.size() << "\n";
          return kExitBound;
        }
        ++done;
      }
    }
  }
  std::cout << "PASS codec roundtrip trials=" << done << "\n";
  return kExitOk;
}

int cmd_serve_cloud(const EndpointOptions& opts) {
  const ExperimentConfig config = load_config(opts.config_path);
  std::unique_ptr<ModelPair> model = model_for(config);
  model->temperature_draft = opts.temperature;
  model->temperature_target = opts.temperature;
  const SessionConfig session = session_from(config, opts, model->vocab_size());

  const auto [host, port] = split_host_port(opts.address);
  const int listen_fd = listen_on(host, port);
  std::cerr << "listening on " << host << ":" << bound_port(listen_fd) << "\n";
  const int conn_fd = accept_one(listen_fd);
  std::unique_ptr<Carrier> carrier = make_socket_carrier(conn_fd);
  const std::vector<TokenId> tokens = run_cloud_session(*carrier, *model, session);
  std::cout << "verified " << session.batches << " batches, emitted " << tokens.size()
            << " tokens\n";
  return kExitOk;
}

int cmd_run_edge(const EndpointOptions& opts) {
  const ExperimentConfig config = load_config(opts.config_path);
  std::unique_ptr<ModelPair> model = model_for(config);
  model->temperature_draft = opts.temperature;
  model->temperature_target = opts.temperature;
  const SessionConfig session = session_from(config, opts, model->vocab_size());

  const auto [host, port] = split_host_port(opts.address);
  std::unique_ptr<Carrier> carrier = make_socket_carrier(connect_to(host, port));
  const SessionResult result = run_edge_session(*carrier, *model, session);
  print_session_summary(result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bandwidth-constrained speculative decoding: sweeps, bound verification,\n"
      "codec fuzzing, and live edge/cloud sessions over TCP."};
  app.require_subcommand(1);

  std::string run_config;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run the configured sweep and emit CSV results");
  run->add_option("--config", run_config, "Experiment config file")->required();
  run->add_option("--out", run_out, "Output CSV path (default: stdout)");

  std::string vb_config;
  std::uint32_t vb_runs = 50;
  std::uint32_t vb_batches = 30;
  auto* verify = app.add_subcommand(
      "verify-bounds", "Check the rejection budget and dropped-mass ceiling empirically");
  verify->add_option("--config", vb_config, "Experiment config file")->required();
  verify->add_option("--runs", vb_runs, "Independent runs per grid point")
      ->capture_default_str();
  verify->add_option("--batches", vb_batches, "Batches per run")->capture_default_str();

  std::uint64_t ct_trials = 2000;
  std::uint64_t ct_seed = 1;
  std::vector<std::uint32_t> ct_vocab;
  auto* codec = app.add_subcommand("codec-test", "Fuzz the packet codec with random packets");
  codec->add_option("--trials", ct_trials, "Total roundtrip trials")->capture_default_str();
  codec->add_option("--seed", ct_seed, "Fuzzing seed")->capture_default_str();
  codec->add_option("--vocab", ct_vocab, "Vocabulary sizes (default: 8 64 512)");

  EndpointOptions serve_opts;
  auto* serve = app.add_subcommand("serve-cloud", "Run the verifying endpoint of a session");
  add_endpoint_options(serve, serve_opts, "--listen", "host:port to listen on");

  EndpointOptions edge_opts;
  auto* edge = app.add_subcommand("run-edge", "Run the drafting endpoint of a session");
  add_endpoint_options(edge, edge_opts, "--connect", "host:port of the verifying endpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the usage error
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config, run_out);
    if (*verify) return cmd_verify_bounds(vb_config, vb_runs, vb_batches);
    if (*codec) return cmd_codec_test(ct_trials, ct_seed, ct_vocab);
    if (*serve) return cmd_serve_cloud(serve_opts);
    if (*edge) return cmd_run_edge(edge_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BoundViolation& e) {
    std::cerr << "bound violation: " << e.what() << "\n";
    return kExitBound;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
