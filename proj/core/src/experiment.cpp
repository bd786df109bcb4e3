#include "sqs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "sqs/bitcost.hpp"
#include "sqs/conformal.hpp"
#include "sqs/distribution.hpp"
#include "sqs/errors.hpp"
#include "sqs/lattice.hpp"
#include "sqs/rng.hpp"
#include "sqs/trace.hpp"

namespace sqs {
namespace {

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  std::stringstream stream(value);
  while (std::getline(stream, current, ',')) {
    current = trim(current);
    if (!current.empty()) items.push_back(current);
  }
  return items;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value +
                      "' as a nonnegative integer");
  }
}

std::uint32_t parse_u32(const std::string& key, const std::string& value) {
  const std::uint64_t parsed = parse_u64(key, value);
  if (parsed > 0xFFFFFFFFULL) {
    throw ConfigError("config key '" + key + "': value " + value + " is too large");
  }
  return static_cast<std::uint32_t>(parsed);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a boolean");
}

Scheme parse_scheme(const std::string& key, const std::string& value) {
  if (value == "k-sqs") return Scheme::KSqs;
  if (value == "c-sqs") return Scheme::CSqs;
  if (value == "qs-dense") return Scheme::QsDense;
  throw ConfigError("config key '" + key + "': unknown scheme '" + value +
                    "' (expected k-sqs, c-sqs, or qs-dense)");
}

// The grid points one scheme contributes: the fixed-support scheme sweeps
// its K grid, the dense scheme is pinned to K = V, the adaptive scheme has
// no K axis.
std::vector<std::uint32_t> scheme_k_points(const ExperimentConfig& config, Scheme scheme,
                                           std::uint32_t vocab) {
  switch (scheme) {
    case Scheme::KSqs: {
      std::vector<std::uint32_t> points = config.k_grid;
      for (std::uint32_t k : points) {
        if (k == 0 || k > vocab) {
          throw ConfigError("config key 'k_grid': K=" + std::to_string(k) +
                            " is outside [1, vocab_size=" + std::to_string(vocab) + "]");
        }
      }
      return points;
    }
    case Scheme::QsDense:
      return {vocab};
    case Scheme::CSqs:
    default:
      return {0};
  }
}

struct DriveLimits {
  std::uint64_t max_tokens = 0;   // 0 = unlimited
  std::uint64_t max_batches = 0;  // 0 = unlimited
  bool reset_context = false;     // fresh random context per batch
  std::uint32_t reset_window = 1;
};

// Context draws get their own stream so enabling resets never perturbs the
// draft or verification randomness of a given seed.
constexpr std::uint64_t kContextStream = 0xBA5E;

RunMetrics drive_run(const ModelPair& model, const SessionConfig& session,
                     const LatencyModel& latency, const ChannelModel& channel,
                     const DriveLimits& limits, bool runtime_checks) {
  if (limits.max_tokens == 0 && limits.max_batches == 0) {
    throw std::invalid_argument("drive_run: unbounded run");
  }
  const std::uint32_t vocab = model.vocab_size();
  const std::uint32_t resolution = session.draft.resolution;

  CounterRng edge_rng(session.seed, kEdgeStream);
  CounterRng cloud_rng(session.seed, kCloudStream);
  CounterRng ctx_rng(session.seed, kContextStream);
  ThresholdController controller(session.beta_initial, session.eta, session.alpha);
  ThresholdController* controller_ptr =
      session.draft.scheme == Scheme::CSqs ? &controller : nullptr;

  RunMetrics m;
  Context ctx;
  double dropped_sum = 0.0;
  double time_sum = 0.0;
  double bits_sum = 0.0;
  double wire_sum = 0.0;

  while ((limits.max_tokens == 0 || m.tokens_generated < limits.max_tokens) &&
         (limits.max_batches == 0 || m.batches < limits.max_batches)) {
    if (limits.reset_context) {
      ctx = Context{};
      for (std::uint32_t i = 0; i < limits.reset_window; ++i) {
        ctx.push(static_cast<std::uint32_t>(ctx_rng.next_u64() % vocab));
      }
    }
    const DraftBatch batch = edge_draft_batch(model, ctx, session.draft, controller_ptr,
                                              edge_rng);
    const BatchOutcome outcome = cloud_verify_batch(model, ctx, batch, cloud_rng);
    if (controller_ptr != nullptr) controller.finish_batch(outcome.accepted_count);

    if (runtime_checks) {
      if (batch.bits_used > session.draft.budget_bits + 1e-9) {
        throw BoundViolation("batch used " + fmt(batch.bits_used) +
                             " bits against a budget of " + fmt(session.draft.budget_bits));
      }
      if (controller_ptr != nullptr) {
        const double lo = -session.eta * (1.0 - session.alpha) - 1e-12;
        const double hi = 1.0 + session.eta * session.alpha + 1e-12;
        if (controller.beta() < lo || controller.beta() > hi) {
          throw BoundViolation("threshold " + fmt(controller.beta()) +
                               " left its universal range");
        }
      }
    }

    // Realized per-position rejection budget: model divergence + dropped
    // mass + lattice distortion cap, along the drafted trajectory.
    Context walk = ctx;
    for (const DraftToken& token : batch.tokens) {
      const TokenDistribution p_n = model.target_distribution(walk);
      double term = tv_distance(token.draft_dist, p_n) + token.sparse.dropped_mass;
      if (resolution > 0) {
        term += static_cast<double>(token.sparse.support_size()) / (4.0 * resolution);
      }
      m.rejection_budget_rhs += term;
      dropped_sum += token.sparse.dropped_mass;

      if (runtime_checks && resolution > 0) {
        const TokenDistribution sparse_dense = densify(token.sparse, vocab);
        const TokenDistribution lattice_dense = densify(token.quantized, vocab);
        const double distortion = tv_distance(sparse_dense, lattice_dense);
        const double cap =
            static_cast<double>(token.sparse.support_size()) / (4.0 * resolution);
        if (distortion > cap + 1e-12) {
          throw BoundViolation("lattice distortion " + fmt(distortion) + " exceeds " +
                               fmt(cap));
        }
      }
      walk.push(token.token_id);
    }

    m.batches += 1;
    m.drafted_tokens += batch.length();
    m.accepted_tokens += outcome.accepted_count;
    m.resampled_tokens += outcome.rejected_resampled ? 1 : 0;
    m.tokens_generated += outcome.accepted_count + 1;
    bits_sum += batch.bits_used;
    wire_sum += static_cast<double>(batch.wire_bits);
    time_sum += latency.batch_seconds(batch.length(), batch.bits_used, channel);

    if (!limits.reset_context) {
      for (std::uint32_t i = 0; i < outcome.accepted_count; ++i) {
        ctx.push(batch.tokens[i].token_id);
      }
      ctx.push(outcome.final_token);
    }
  }

  if (m.batches > 0) {
    m.resampling_rate = m.resampled_tokens / m.batches;
    m.avg_total_time = time_sum / m.batches;
    m.avg_bits_per_batch = bits_sum / m.batches;
    m.avg_wire_bits_per_batch = wire_sum / m.batches;
  }
  if (m.drafted_tokens > 0) m.avg_dropped_mass = dropped_sum / m.drafted_tokens;

  if (controller_ptr != nullptr) {
    m.conformal_steps = static_cast<double>(controller.steps_committed());
    m.beta_final = controller.beta();
    if (controller.steps_committed() > 0) {
      m.conformal_avg_dropped =
          controller.dropped_committed() / static_cast<double>(controller.steps_committed());
      // A frozen threshold (eta = 0) has no guarantee and no telescoping
      // identity; both involve dividing by eta.
      if (session.eta > 0.0) {
        m.dropped_ceiling_rhs = average_dropped_ceiling(session.beta_initial, session.eta,
                                                       session.alpha,
                                                       controller.steps_committed());
        if (runtime_checks) {
          // The committed updates telescope: total dropped mass equals
          // alpha * steps + (beta_start - beta_end) / eta.
          const double steps = static_cast<double>(controller.steps_committed());
          const double expected = session.alpha * steps +
                                  (session.beta_initial - controller.beta()) / session.eta;
          if (std::abs(controller.dropped_committed() - expected) > 1e-9) {
            throw BoundViolation("threshold telescoping identity violated by " +
                                 fmt(std::abs(controller.dropped_committed() - expected)));
          }
        }
      }
    }
  } else {
    m.beta_final = session.beta_initial;
  }
  return m;
}

SessionConfig make_session(const ExperimentConfig& config, Scheme scheme, std::uint32_t top_k,
                           double beta_initial, std::uint64_t seed) {
  SessionConfig session;
  session.draft.scheme = scheme;
  session.draft.top_k = top_k;
  session.draft.resolution = config.resolution;
  session.draft.budget_bits = config.budget_bits;
  session.draft.l_max = config.l_max;
  session.draft.charge_token_bits = config.charge_token_bits;
  session.alpha = config.alpha;
  session.eta = config.eta;
  session.beta_initial = beta_initial;
  session.seed = seed;
  return session;
}

std::unique_ptr<ModelPair> build_model(const ExperimentConfig& config) {
  if (!config.trace_path.empty()) return trace_pair(config.trace_path);
  return synthetic_pair(config.model);
}

// 0 disables per-batch resets; otherwise the fresh context is one full
// conditioning window (trace models have no declared order; 8 covers them).
std::uint32_t reset_window_for(const ExperimentConfig& config) {
  if (!config.context_reset_per_batch) return 0;
  if (!config.trace_path.empty()) return 8;
  return std::max<std::uint32_t>(1, config.model.markov_order);
}

RunMetrics mean_of(const std::vector<RunMetrics>& runs) {
  RunMetrics mean;
  const double n = static_cast<double>(runs.size());
  auto add = [&](double RunMetrics::* field) {
    double sum = 0.0;
    for (const RunMetrics& r : runs) sum += r.*field;
    mean.*field = sum / n;
  };
  add(&RunMetrics::batches);
  add(&RunMetrics::drafted_tokens);
  add(&RunMetrics::accepted_tokens);
  add(&RunMetrics::resampled_tokens);
  add(&RunMetrics::tokens_generated);
  add(&RunMetrics::resampling_rate);
  add(&RunMetrics::avg_total_time);
  add(&RunMetrics::avg_bits_per_batch);
  add(&RunMetrics::avg_wire_bits_per_batch);
  add(&RunMetrics::avg_dropped_mass);
  add(&RunMetrics::rejection_budget_rhs);
  add(&RunMetrics::conformal_steps);
  add(&RunMetrics::conformal_avg_dropped);
  add(&RunMetrics::dropped_ceiling_rhs);
  add(&RunMetrics::beta_final);
  return mean;
}

RunMetrics stderr_of(const std::vector<RunMetrics>& runs, const RunMetrics& mean) {
  RunMetrics err;
  const double n = static_cast<double>(runs.size());
  if (runs.size() < 2) return err;
  auto add = [&](double RunMetrics::* field) {
    double ss = 0.0;
    for (const RunMetrics& r : runs) {
      const double d = r.*field - mean.*field;
      ss += d * d;
    }
    err.*field = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  };
  add(&RunMetrics::batches);
  add(&RunMetrics::drafted_tokens);
  add(&RunMetrics::accepted_tokens);
  add(&RunMetrics::resampled_tokens);
  add(&RunMetrics::tokens_generated);
  add(&RunMetrics::resampling_rate);
  add(&RunMetrics::avg_total_time);
  add(&RunMetrics::avg_bits_per_batch);
  add(&RunMetrics::avg_wire_bits_per_batch);
  add(&RunMetrics::avg_dropped_mass);
  add(&RunMetrics::rejection_budget_rhs);
  add(&RunMetrics::conformal_steps);
  add(&RunMetrics::conformal_avg_dropped);
  add(&RunMetrics::dropped_ceiling_rhs);
  add(&RunMetrics::beta_final);
  return err;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw ConfigError("config key 'schemes': at least one scheme required");
  if (temperatures.empty()) {
    throw ConfigError("config key 'temperatures': at least one temperature required");
  }
  for (double t : temperatures) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ConfigError("config key 'temperatures': temperatures must be finite and >= 0");
    }
  }
  const bool wants_ksqs =
      std::find(schemes.begin(), schemes.end(), Scheme::KSqs) != schemes.end();
  if (wants_ksqs && k_grid.empty()) {
    throw ConfigError("config key 'k_grid': required when the k-sqs scheme is enabled");
  }
  for (std::uint32_t k : k_grid) {
    if (k == 0) throw ConfigError("config key 'k_grid': K values must be >= 1");
  }
  if (!(budget_bits > 0.0) || !std::isfinite(budget_bits)) {
    throw ConfigError("config key 'budget_bits': must be positive and finite");
  }
  if (l_max == 0) throw ConfigError("config key 'l_max': must be >= 1");
  if (l_max > 0xFFFF) throw ConfigError("config key 'l_max': must fit in 16 bits");
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw ConfigError("config key 'alpha': must lie in (0, 1)");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ConfigError("config key 'eta': must be finite and >= 0");
  }
  if (seeds == 0) throw ConfigError("config key 'seeds': must be >= 1");
  if (tokens_per_run == 0) throw ConfigError("config key 'tokens_per_run': must be >= 1");
  if (trace_path.empty()) {
    if (model.vocab_size < 2) {
      throw ConfigError("config key 'vocab_size': must be >= 2");
    }
    if (!(model.divergence >= 0.0) || !(model.divergence <= 1.0)) {
      throw ConfigError("config key 'divergence': must lie in [0, 1]");
    }
    if (!(model.concentration > 0.0)) {
      throw ConfigError("config key 'concentration': must be positive");
    }
  }
  try {
    channel.validate();
    latency.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

double ExperimentConfig::beta_initial_effective(std::uint32_t vocab_size) const {
  if (beta_initial >= 0.0) return beta_initial;
  return 1.0 / static_cast<double>(vocab_size);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::stringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line '" + line + "': expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line '" + line + "': empty key");

    if (key == "schemes") {
      config.schemes.clear();
      for (const std::string& item : split_list(value)) {
        config.schemes.push_back(parse_scheme(key, item));
      }
    } else if (key == "temperatures") {
      config.temperatures.clear();
      for (const std::string& item : split_list(value)) {
        config.temperatures.push_back(parse_double(key, item));
      }
    } else if (key == "k_grid") {
      config.k_grid.clear();
      for (const std::string& item : split_list(value)) {
        config.k_grid.push_back(parse_u32(key, item));
      }
    } else if (key == "resolution") {
      config.resolution = parse_u32(key, value);
    } else if (key == "budget_bits") {
      config.budget_bits = parse_double(key, value);
    } else if (key == "l_max") {
      config.l_max = parse_u32(key, value);
    } else if (key == "charge_token_bits") {
      config.charge_token_bits = parse_bool(key, value);
    } else if (key == "alpha") {
      config.alpha = parse_double(key, value);
    } else if (key == "eta") {
      config.eta = parse_double(key, value);
    } else if (key == "beta_initial") {
      config.beta_initial = parse_double(key, value);
    } else if (key == "seeds") {
      config.seeds = parse_u32(key, value);
    } else if (key == "seed_base") {
      config.seed_base = parse_u64(key, value);
    } else if (key == "tokens_per_run") {
      config.tokens_per_run = parse_u32(key, value);
    } else if (key == "context_reset") {
      if (value == "none") {
        config.context_reset_per_batch = false;
      } else if (value == "batch") {
        config.context_reset_per_batch = true;
      } else {
        throw ConfigError("config key 'context_reset': expected 'none' or 'batch', got '" +
                          value + "'");
      }
    } else if (key == "vocab_size") {
      config.model.vocab_size = parse_u32(key, value);
    } else if (key == "markov_order") {
      config.model.markov_order = parse_u32(key, value);
    } else if (key == "divergence") {
      config.model.divergence = parse_double(key, value);
    } else if (key == "concentration") {
      config.model.concentration = parse_double(key, value);
    } else if (key == "flat_fraction") {
      config.model.flat_fraction = parse_double(key, value);
    } else if (key == "flat_spread") {
      config.model.flat_spread = parse_double(key, value);
    } else if (key == "model_seed") {
      config.model.seed = parse_u64(key, value);
    } else if (key == "trace_path") {
      config.trace_path = value;
    } else if (key == "bandwidth_bits_per_s") {
      config.channel.bandwidth_bits_per_s = parse_double(key, value);
    } else if (key == "rtt_s") {
      config.channel.rtt_s = parse_double(key, value);
    } else if (key == "t_slm_per_token_s") {
      config.latency.t_slm_per_token_s = parse_double(key, value);
    } else if (key == "t_llm_verify_per_batch_s") {
      config.latency.t_llm_verify_per_batch_s = parse_double(key, value);
    } else if (key == "runtime_checks") {
      config.runtime_checks = parse_bool(key, value);
    } else {
      throw ConfigError("config key '" + key + "': unknown key");
    }
  }
  config.channel.per_batch_budget_bits = config.budget_bits;
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::uint32_t budget_prefix_length(const std::vector<double>& costs, double budget,
                                   std::uint32_t l_max) {
  double used = 0.0;
  std::uint32_t length = 0;
  for (double cost : costs) {
    if (length >= l_max) break;
    if (used + cost > budget) break;
    used += cost;
    ++length;
  }
  return length;
}

RunMetrics run_single(const ModelPair& model, const SessionConfig& session,
                      const LatencyModel& latency, const ChannelModel& channel,
                      std::uint32_t tokens_per_run, bool runtime_checks,
                      std::uint32_t context_window) {
  DriveLimits limits;
  limits.max_tokens = tokens_per_run;
  limits.reset_context = context_window > 0;
  limits.reset_window = context_window;
  return drive_run(model, session, latency, channel, limits, runtime_checks);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::unique_ptr<ModelPair> model = build_model(config);
  const std::uint32_t vocab = model->vocab_size();
  const double beta_initial = config.beta_initial_effective(vocab);

  std::vector<ResultRow> rows;
  for (Scheme scheme : config.schemes) {
    for (std::uint32_t k : scheme_k_points(config, scheme, vocab)) {
      for (double temperature : config.temperatures) {
        model->temperature_draft = temperature;
        model->temperature_target = temperature;

        ResultRow base;
        base.scheme = scheme;
        base.temperature = temperature;
        base.top_k = k;
        base.alpha = config.alpha;
        base.eta = config.eta;
        base.beta_initial = beta_initial;

        std::vector<RunMetrics> per_seed;
        for (std::uint32_t s = 0; s < config.seeds; ++s) {
          const std::uint64_t seed = config.seed_base + s;
          const SessionConfig session = make_session(config, scheme, k, beta_initial, seed);
          RunMetrics metrics = run_single(*model, session, config.latency, config.channel,
                                          config.tokens_per_run, config.runtime_checks,
                                          reset_window_for(config));
          ResultRow row = base;
          row.seed_label = std::to_string(seed);
          row.metrics = metrics;
          rows.push_back(std::move(row));
          per_seed.push_back(metrics);
        }
        ResultRow mean_row = base;
        mean_row.seed_label = "mean";
        mean_row.metrics = mean_of(per_seed);
        rows.push_back(mean_row);
        ResultRow err_row = base;
        err_row.seed_label = "stderr";
        err_row.metrics = stderr_of(per_seed, mean_row.metrics);
        rows.push_back(err_row);
      }
    }
  }
  return rows;
}

RejectionBudgetResult evaluate_rejection_budget(const ExperimentConfig& config, Scheme scheme,
                                                std::uint32_t top_k, double temperature,
                                                std::uint32_t runs,
                                                std::uint32_t batches_per_run) {
  if (runs < 2) throw std::invalid_argument("evaluate_rejection_budget: need >= 2 runs");
  config.validate();
  std::unique_ptr<ModelPair> model = build_model(config);
  model->temperature_draft = temperature;
  model->temperature_target = temperature;
  const double beta_initial = config.beta_initial_effective(model->vocab_size());

  std::vector<double> rejections;
  std::vector<double> rhs;
  rejections.reserve(runs);
  rhs.reserve(runs);
  DriveLimits limits;
  limits.max_batches = batches_per_run;
  limits.reset_context = config.context_reset_per_batch;
  limits.reset_window = reset_window_for(config);
  for (std::uint32_t m = 0; m < runs; ++m) {
    const SessionConfig session =
        make_session(config, scheme, top_k, beta_initial, config.seed_base + m);
    const RunMetrics metrics = drive_run(*model, session, config.latency, config.channel,
                                         limits, config.runtime_checks);
    rejections.push_back(metrics.resampled_tokens);
    rhs.push_back(metrics.rejection_budget_rhs);
  }

  auto mean = [](const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
  };
  auto stderr_mean = [&](const std::vector<double>& xs, double mu) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0)) /
           std::sqrt(static_cast<double>(xs.size()));
  };

  RejectionBudgetResult result;
  result.runs = runs;
  result.mean_rejections = mean(rejections);
  result.mean_rhs = mean(rhs);
  result.stderr_rejections = stderr_mean(rejections, result.mean_rejections);
  result.stderr_rhs = stderr_mean(rhs, result.mean_rhs);
  result.holds =
      result.mean_rejections <= result.mean_rhs + 4.0 * result.stderr_rejections;
  return result;
}

std::string render_csv(const std::vector<ResultRow>& rows, const ExperimentConfig& config) {
  std::string out;
  out += "# bandwidth-constrained speculative decoding sweep\n";
  out += "# per-seed rows first, then 'mean'/'stderr' rows aggregating the grid point\n";
  std::string schemes;
  for (std::size_t i = 0; i < config.schemes.size(); ++i) {
    if (i > 0) schemes += ",";
    schemes += scheme_name(config.schemes[i]);
  }
  std::string temps;
  for (std::size_t i = 0; i < config.temperatures.size(); ++i) {
    if (i > 0) temps += ",";
    temps += fmt(config.temperatures[i]);
  }
  std::string ks;
  for (std::size_t i = 0; i < config.k_grid.size(); ++i) {
    if (i > 0) ks += ",";
    ks += std::to_string(config.k_grid[i]);
  }
  out += "# schemes = " + schemes + "\n";
  out += "# temperatures = " + temps + "\n";
  out += "# k_grid = " + ks + "\n";
  out += "# resolution = " + std::to_string(config.resolution) + "\n";
  out += "# budget_bits = " + fmt(config.budget_bits) + "\n";
  out += "# l_max = " + std::to_string(config.l_max) + "\n";
  out += "# charge_token_bits = " + std::string(config.charge_token_bits ? "true" : "false") +
         "\n";
  out += "# alpha = " + fmt(config.alpha) + "\n";
  out += "# eta = " + fmt(config.eta) + "\n";
  out += "# beta_initial = " + fmt(config.beta_initial) + "\n";
  out += "# seeds = " + std::to_string(config.seeds) + "\n";
  out += "# seed_base = " + std::to_string(config.seed_base) + "\n";
  out += "# tokens_per_run = " + std::to_string(config.tokens_per_run) + "\n";
  out += "# context_reset = " + std::string(config.context_reset_per_batch ? "batch" : "none") +
         "\n";
  if (config.trace_path.empty()) {
    out += "# vocab_size = " + std::to_string(config.model.vocab_size) + "\n";
    out += "# markov_order = " + std::to_string(config.model.markov_order) + "\n";
    out += "# divergence = " + fmt(config.model.divergence) + "\n";
    out += "# concentration = " + fmt(config.model.concentration) + "\n";
    out += "# flat_fraction = " + fmt(config.model.flat_fraction) + "\n";
    out += "# flat_spread = " + fmt(config.model.flat_spread) + "\n";
    out += "# model_seed = " + std::to_string(config.model.seed) + "\n";
  } else {
    out += "# trace_path = " + config.trace_path + "\n";
  }
  out += "# bandwidth_bits_per_s = " + fmt(config.channel.bandwidth_bits_per_s) + "\n";
  out += "# rtt_s = " + fmt(config.channel.rtt_s) + "\n";
  out += "# t_slm_per_token_s = " + fmt(config.latency.t_slm_per_token_s) + "\n";
  out += "# t_llm_verify_per_batch_s = " + fmt(config.latency.t_llm_verify_per_batch_s) + "\n";

  out +=
      "scheme,temperature,top_k,alpha,eta,beta_initial,seed,batches,drafted_tokens,"
      "accepted_tokens,resampled_tokens,tokens_generated,resampling_rate,avg_total_time,"
      "avg_bits_per_batch,avg_wire_bits_per_batch,avg_dropped_mass,rejection_budget_rhs,"
      "conformal_steps,conformal_avg_dropped,dropped_ceiling_rhs,beta_final\n";
  for (const ResultRow& row : rows) {
    const RunMetrics& m = row.metrics;
    std::vector<std::string> fields = {
        scheme_name(row.scheme),
        fmt(row.temperature),
        std::to_string(row.top_k),
        fmt(row.alpha),
        fmt(row.eta),
        fmt(row.beta_initial),
        row.seed_label,
        fmt(m.batches),
        fmt(m.drafted_tokens),
        fmt(m.accepted_tokens),
        fmt(m.resampled_tokens),
        fmt(m.tokens_generated),
        fmt(m.resampling_rate),
        fmt(m.avg_total_time),
        fmt(m.avg_bits_per_batch),
        fmt(m.avg_wire_bits_per_batch),
        fmt(m.avg_dropped_mass),
        fmt(m.rejection_budget_rhs),
        fmt(m.conformal_steps),
        fmt(m.conformal_avg_dropped),
        fmt(m.dropped_ceiling_rhs),
        fmt(m.beta_final),
    };
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_quote(fields[i]);
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const ExperimentConfig& config,
              const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path);
  const std::string text = render_csv(rows, config);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sqs
