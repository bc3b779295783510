#include "bts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bts/bandit.hpp"
#include "bts/rl.hpp"
#include "bts/stats.hpp"

namespace bts {

namespace {

[[noreturn]] void bad_field(std::string_view field, const std::string &why) {
  throw std::invalid_argument("invalid config field '" + std::string(field) + "': " + why);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, std::string_view text) {
  const auto s = trim(text);
  T value{};
  const auto *end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty())
    bad_field(field, "cannot parse '" + s + "'");
  return value;
}

// Unsigned parse that rejects a leading minus sign instead of wrapping.
std::size_t parse_count(std::string_view field, std::string_view text) {
  const auto s = trim(text);
  if (!s.empty() && s.front() == '-') bad_field(field, "must be nonnegative");
  return parse_number<std::size_t>(field, s);
}

bool parse_bool(std::string_view field, std::string_view text) {
  const auto s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_field(field, "expected a boolean, got '" + s + "'");
}

bool is_bandit_algorithm(const std::string &a) {
  return a == "classic" || a == "bayes" || a == "besa" || a == "greedy";
}

bool is_rl_algorithm(const std::string &a) {
  return a == "ensemble" || a == "bootstrap" || a == "egreedy";
}

TieBreak ties_of(const ExperimentConfig &c) {
  return c.deterministic_ties ? TieBreak::Lowest : TieBreak::Uniform;
}

std::ofstream open_for_write(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish_write(std::ofstream &out, const std::string &path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Bandit: return "bandit";
    case ExperimentKind::Equivalence: return "equivalence";
    case ExperimentKind::RlChain: return "rl-chain";
  }
  return "unknown";
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Bandit:
      c.algorithms = {"classic", "bayes", "besa"};
      c.m_values = {0, 2};
      break;
    case ExperimentKind::Equivalence:
      break;
    case ExperimentKind::RlChain:
      c.algorithms = {"ensemble", "egreedy"};
      c.m_values = {10};
      c.replications = 10;
      break;
  }
  return c;
}

void validate(const ExperimentConfig &c) {
  if (!c.seed) bad_field("seed", "required");
  if (c.replications < 1) bad_field("replications", "must be at least 1");
  switch (c.kind) {
    case ExperimentKind::Bandit:
      if (c.algorithms.empty()) bad_field("algorithm", "no algorithm selected");
      for (const auto &a : c.algorithms)
        if (!is_bandit_algorithm(a)) bad_field("algorithm", "unknown bandit algorithm '" + a + "'");
      if (c.m_values.empty()) bad_field("M", "no value given");
      for (const auto &a : c.algorithms)
        if (a == "greedy")
          for (auto m : c.m_values)
            if (m != 0) bad_field("M", "the greedy baseline takes no artificial data");
      if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) bad_field("epsilon", "must lie in (0, 1/2)");
      if (c.horizon < 1) bad_field("horizon", "must be at least 1");
      break;
    case ExperimentKind::Equivalence:
      if (c.draws < 1000) bad_field("draws", "must be at least 1000");
      break;
    case ExperimentKind::RlChain:
      if (c.algorithms.empty()) bad_field("algorithm", "no algorithm selected");
      for (const auto &a : c.algorithms)
        if (!is_rl_algorithm(a)) bad_field("algorithm", "unknown rl algorithm '" + a + "'");
      if (c.m_values.size() != 1) bad_field("M", "exactly one value expected");
      if (c.chain_length < 3) bad_field("chain-length", "must be at least 3");
      if (c.episode_horizon < c.chain_length)
        bad_field("episode-horizon", "must be at least the chain length");
      if (c.episodes < 1) bad_field("episodes", "must be at least 1");
      if (c.models < 1) bad_field("models", "must be at least 1");
      if (!(c.baseline_epsilon >= 0.0 && c.baseline_epsilon <= 1.0))
        bad_field("baseline-epsilon", "must lie in [0, 1]");
      if (c.window_start < 1 || c.window_start > c.episodes)
        bad_field("window-start", "must lie in [1, episodes]");
      for (const auto &a : c.algorithms)
        if ((a == "ensemble" || a == "bootstrap") && c.m_values.front() == 0)
          bad_field("M", "'" + a + "' needs at least one artificial episode");
      break;
  }
}

void apply_config_value(ExperimentConfig &c, std::string_view key, std::string_view value) {
  if (key == "algorithm") {
    c.algorithms = split_list(value);
  } else if (key == "M") {
    c.m_values.clear();
    for (const auto &piece : split_list(value)) c.m_values.push_back(parse_count(key, piece));
  } else if (key == "epsilon") {
    c.epsilon = parse_number<double>(key, value);
  } else if (key == "horizon") {
    c.horizon = parse_count(key, value);
  } else if (key == "replications") {
    c.replications = parse_count(key, value);
  } else if (key == "seed") {
    const auto s = trim(value);
    if (!s.empty() && s.front() == '-') bad_field(key, "must be nonnegative");
    c.seed = parse_number<std::uint64_t>(key, s);
  } else if (key == "output") {
    c.output = trim(value);
  } else if (key == "threads") {
    c.threads = parse_count(key, value);
  } else if (key == "freeze-artificial") {
    c.freeze_artificial = parse_bool(key, value);
  } else if (key == "deterministic-ties") {
    c.deterministic_ties = parse_bool(key, value);
  } else if (key == "draws") {
    c.draws = parse_count(key, value);
  } else if (key == "chain-length") {
    c.chain_length = parse_count(key, value);
  } else if (key == "episode-horizon") {
    c.episode_horizon = parse_count(key, value);
  } else if (key == "episodes") {
    c.episodes = parse_count(key, value);
  } else if (key == "models") {
    c.models = parse_count(key, value);
  } else if (key == "baseline-epsilon") {
    c.baseline_epsilon = parse_number<double>(key, value);
  } else if (key == "window-start") {
    c.window_start = parse_count(key, value);
  } else {
    bad_field(key, "unknown key");
  }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const auto stripped = trim(line);
    if (!stripped.empty()) {
      const auto eq = stripped.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected key = value");
      auto key = trim(std::string_view(stripped).substr(0, eq));
      auto value = trim(std::string_view(stripped).substr(eq + 1));
      if (key.empty())
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
      out.emplace_back(std::move(key), std::move(value));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)> &body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

RegretTable run_bandit_experiment(const ExperimentConfig &config) {
  validate(config);
  if (config.kind != ExperimentKind::Bandit) bad_field("kind", "expected a bandit experiment");
  const auto env = make_dirac_env(config.epsilon);
  const std::uint64_t base = *config.seed;

  RegretTable table;
  for (const auto &algorithm : config.algorithms) {
    for (const auto m : config.m_values) {
      std::vector<std::vector<double>> regrets(config.replications);
      parallel_for(config.replications, config.threads, [&](std::size_t r) {
        Rng rng = make_rng(base + r);
        BanditRun run;
        if (algorithm == "greedy") {
          run = run_greedy(env, config.horizon, rng, ties_of(config));
        } else {
          BootstrapThompsonOptions options;
          options.kind = *parse_bootstrap_kind(algorithm);
          options.sampler = uniform_outcome_sampler(env.arm_count(), m);
          options.freeze_artificial = config.freeze_artificial;
          options.ties = ties_of(config);
          run = run_bootstrap_thompson(env, options, config.horizon, rng);
        }
        regrets[r] = cumulative_regret(env, run.actions);
      });
      for (std::size_t r = 0; r < config.replications; ++r)
        for (std::size_t t = 0; t < regrets[r].size(); ++t)
          table.rows.push_back({r, t + 1, regrets[r][t], algorithm, m});
    }
  }
  return table;
}

std::vector<KsCell> run_equivalence_suite(const EquivalenceGrid &grid, std::size_t n,
                                          Rng &rng) {
  if (n < 1000) throw std::invalid_argument("at least 1000 draws per cell are required");
  std::vector<KsCell> cells;
  for (const int alpha : grid.alphas)
    for (const int beta : grid.betas)
      for (const auto s : grid.successes)
        for (const auto f : grid.failures) {
          Rng boot_rng = spawn_rng(rng);
          Rng beta_rng = spawn_rng(rng);
          std::vector<double> boot(n), direct(n);
          for (auto &x : boot) x = bayes_bootstrap_theta_sample(alpha, beta, s, f, boot_rng);
          const double a = static_cast<double>(alpha) + static_cast<double>(s);
          const double b = static_cast<double>(beta) + static_cast<double>(f);
          for (auto &x : direct) x = sample_beta(a, b, beta_rng);
          cells.push_back({alpha, beta, s, f, two_sample_ks(std::move(boot), std::move(direct))});
        }
  return cells;
}

RlTable run_rl_experiment(const ExperimentConfig &config) {
  validate(config);
  if (config.kind != ExperimentKind::RlChain) bad_field("kind", "expected an rl-chain experiment");
  const auto mdp = make_chain_mdp(config.chain_length, config.episode_horizon);
  const std::size_t m = config.m_values.front();
  const auto sampler = optimistic_episode_sampler(mdp.dims(), m);
  const std::uint64_t base = *config.seed;

  RlTable table;
  for (const auto &algorithm : config.algorithms) {
    std::vector<std::vector<double>> traces(config.replications);
    parallel_for(config.replications, config.threads, [&](std::size_t r) {
      Rng rng = make_rng(base + r);
      if (algorithm == "ensemble") {
        traces[r] = incremental_ensemble_run(mdp, config.models, sampler, config.episodes,
                                             rng, ties_of(config))
                        .rewards;
      } else if (algorithm == "bootstrap") {
        traces[r] = run_bootstrap_rl(mdp, sampler, BootstrapKind::Bayes, config.episodes,
                                     rng, ties_of(config));
      } else {
        traces[r] = epsilon_greedy_run(mdp, config.baseline_epsilon, config.episodes, rng,
                                       TieBreak::Lowest);
      }
    });
    for (std::size_t r = 0; r < config.replications; ++r)
      for (std::size_t l = 0; l < traces[r].size(); ++l)
        table.rows.push_back({r, l + 1, traces[r][l], algorithm});
  }
  return table;
}

std::string format_number(double value) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.10g", value == 0.0 ? 0.0 : value);
  return std::string(buf, static_cast<std::size_t>(n));
}

void emit_csv(const RegretTable &table, std::ostream &out) {
  out << "rep,t,regret,algorithm,M\n";
  for (const auto &row : table.rows)
    out << row.rep << ',' << row.t << ',' << format_number(row.regret) << ','
        << row.algorithm << ',' << row.m << '\n';
}

void emit_csv(const std::vector<KsCell> &cells, std::ostream &out) {
  out << "alpha,beta,successes,failures,ks\n";
  for (const auto &c : cells)
    out << c.alpha << ',' << c.beta << ',' << c.successes << ',' << c.failures << ','
        << format_number(c.statistic) << '\n';
}

void emit_csv(const RlTable &table, std::ostream &out) {
  out << "rep,episode,reward,algorithm\n";
  for (const auto &row : table.rows)
    out << row.rep << ',' << row.episode << ',' << format_number(row.reward) << ','
        << row.algorithm << '\n';
}

void emit_csv(const RegretTable &table, const std::string &path) {
  auto out = open_for_write(path);
  emit_csv(table, out);
  finish_write(out, path);
}

void emit_csv(const std::vector<KsCell> &cells, const std::string &path) {
  auto out = open_for_write(path);
  emit_csv(cells, out);
  finish_write(out, path);
}

void emit_csv(const RlTable &table, const std::string &path) {
  auto out = open_for_write(path);
  emit_csv(table, out);
  finish_write(out, path);
}

RegretTable parse_regret_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != "rep,t,regret,algorithm,M")
    throw std::invalid_argument("missing regret CSV header");
  RegretTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_list(line);
    if (fields.size() != 5)
      throw std::invalid_argument("regret CSV line " + std::to_string(line_no) +
                                  ": expected 5 fields");
    table.rows.push_back({parse_count("rep", fields[0]), parse_count("t", fields[1]),
                          parse_number<double>("regret", fields[2]), fields[3],
                          parse_count("M", fields[4])});
  }
  return table;
}

std::vector<RegretSummary> summarize(const RegretTable &table, double epsilon) {
  if (table.rows.empty()) throw std::invalid_argument("cannot summarize an empty table");
  // Final (largest t) regret of every replication, grouped by variant in
  // first-appearance order.
  std::vector<std::pair<std::string, std::size_t>> order;
  std::map<std::pair<std::string, std::size_t>,
           std::map<std::size_t, std::pair<std::size_t, double>>>
      finals;
  for (const auto &row : table.rows) {
    const auto key = std::make_pair(row.algorithm, row.m);
    if (!finals.contains(key)) order.push_back(key);
    auto &slot = finals[key][row.rep];
    if (row.t >= slot.first) slot = {row.t, row.regret};
  }
  std::vector<RegretSummary> out;
  for (const auto &key : order) {
    std::vector<double> values;
    std::size_t stuck = 0;
    for (const auto &[rep, final] : finals[key]) {
      values.push_back(final.second);
      if (final.second >= 0.9 * epsilon * static_cast<double>(final.first)) ++stuck;
    }
    out.push_back({key.first, key.second, values.size(), mean(values), median(values),
                   static_cast<double>(stuck) / static_cast<double>(values.size())});
  }
  return out;
}

std::vector<RlSummary> summarize(const RlTable &table, std::size_t window_start) {
  if (table.rows.empty()) throw std::invalid_argument("cannot summarize an empty table");
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, std::vector<double>>> windows;
  for (const auto &row : table.rows) {
    if (!windows.contains(row.algorithm)) order.push_back(row.algorithm);
    auto &per_rep = windows[row.algorithm][row.rep];
    if (row.episode >= window_start) per_rep.push_back(row.reward);
  }
  std::vector<RlSummary> out;
  for (const auto &algorithm : order) {
    std::vector<double> rep_means;
    for (const auto &[rep, rewards] : windows[algorithm])
      if (!rewards.empty()) rep_means.push_back(mean(rewards));
    if (rep_means.empty())
      throw std::invalid_argument("no episodes at or after the window start");
    out.push_back({algorithm, rep_means.size(), mean(rep_means)});
  }
  return out;
}

std::string format_summary(const std::vector<RegretSummary> &rows) {
  std::ostringstream out;
  out << "algorithm  M  reps  mean_final  median_final  stuck_fraction\n";
  for (const auto &r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-9s %2zu %5zu %11.4f %13.4f %15.3f\n",
                  r.algorithm.c_str(), r.m, r.replications, r.mean_final, r.median_final,
                  r.stuck_fraction);
    out << buf;
  }
  return out.str();
}

std::string format_summary(const std::vector<RlSummary> &rows) {
  std::ostringstream out;
  out << "algorithm  reps  window_mean_reward\n";
  for (const auto &r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-9s %5zu %19.4f\n", r.algorithm.c_str(),
                  r.replications, r.window_mean);
    out << buf;
  }
  return out.str();
}

}  // namespace bts
