#include "scsmtt/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace scsmtt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

double to_double(const std::string& key, const std::string& tok) {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(key, "expected a number, got '" + tok + "'");
    }
    return v;
}

long long to_int(const std::string& key, const std::string& tok) {
    long long v = 0;
    const auto* end = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(key, "expected an integer, got '" + tok + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& tok) {
    if (tok == "true" || tok == "1") {
        return true;
    }
    if (tok == "false" || tok == "0") {
        return false;
    }
    throw ConfigError(key, "expected true or false, got '" + tok + "'");
}

std::vector<double> numbers(const std::string& key, const std::string& value, std::size_t expected) {
    std::vector<double> out;
    for (const auto& t : split_ws(value)) {
        out.push_back(to_double(key, t));
    }
    if (out.size() != expected) {
        throw ConfigError(key, "expected " + std::to_string(expected) + " numbers, got " + std::to_string(out.size()));
    }
    return out;
}

double number(const std::string& key, const std::string& value) { return numbers(key, value, 1).front(); }

int integer(const std::string& key, const std::string& value) {
    const auto t = split_ws(value);
    if (t.size() != 1) {
        throw ConfigError(key, "expected one integer");
    }
    const long long v = to_int(key, t.front());
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError(key, "integer out of range");
    }
    return static_cast<int>(v);
}

/// n values give a diagonal matrix, n*n values a full row-major one.
Matrix square(const std::string& key, const std::string& value, Eigen::Index n) {
    const auto t = split_ws(value);
    const auto count = static_cast<Eigen::Index>(t.size());
    if (count == n) {
        Matrix m = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i, i) = to_double(key, t[static_cast<std::size_t>(i)]);
        }
        return m;
    }
    if (count == n * n) {
        Matrix m(n, n);
        for (Eigen::Index i = 0; i < n * n; ++i) {
            m(i / n, i % n) = to_double(key, t[static_cast<std::size_t>(i)]);
        }
        return m;
    }
    throw ConfigError(key, "expected " + std::to_string(n) + " diagonal or " + std::to_string(n * n) + " entries");
}

Vector state4(const std::string& key, const std::vector<std::string>& t, std::size_t first) {
    Vector v(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
        v(i) = to_double(key, t[first + static_cast<std::size_t>(i)]);
    }
    return v;
}

AgentTrackSpec parse_agent(const std::string& value) {
    const auto t = split_ws(value);
    if (t.size() != 8) {
        throw ConfigError("agent", "expected: name anchor meas_range comm_range px py vx vy");
    }
    AgentTrackSpec a;
    a.spec.name = t[0];
    a.spec.anchor = to_bool("agent", t[1]);
    a.spec.meas_range = to_double("agent", t[2]);
    a.spec.comm_range = to_double("agent", t[3]);
    a.initial_state = state4("agent", t, 4);
    return a;
}

TargetTrackSpec parse_target(const std::string& value) {
    const auto t = split_ws(value);
    if (t.size() != 6) {
        throw ConfigError("target", "expected: birth death px py vx vy");
    }
    TargetTrackSpec k;
    k.birth = integer("target", t[0]);
    k.death = integer("target", t[1]);
    k.initial_state = state4("target", t, 2);
    return k;
}

bool apply_scenario_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    auto& c = spec.scenario;
    if (key == "steps") {
        c.steps = integer(key, value);
    } else if (key == "ts") {
        c.ts = number(key, value);
    } else if (key == "roi") {
        const auto v = numbers(key, value, 4);
        c.roi = Rect{v[0], v[1], v[2], v[3]};
    } else if (key == "sigma_q_target") {
        c.sigma_q_target = number(key, value);
    } else if (key == "sigma_q_agent") {
        c.sigma_q_agent = number(key, value);
    } else if (key == "R") {
        c.sensor.R = square(key, value, 2);
    } else if (key == "W") {
        c.sensor.W = square(key, value, 2);
    } else if (key == "p_detect") {
        c.sensor.p_detect = number(key, value);
    } else if (key == "clutter_rate") {
        c.sensor.clutter_rate = number(key, value);
    } else if (key == "p_survival") {
        c.p_survival = number(key, value);
    } else if (key == "p_birth") {
        c.p_birth = number(key, value);
    } else if (key == "existence_threshold") {
        c.existence_threshold = number(key, value);
        spec.filter.existence_threshold = c.existence_threshold;
    } else if (key == "ospa_cutoff") {
        c.ospa_cutoff = number(key, value);
    } else if (key == "ospa_order") {
        c.ospa_order = number(key, value);
    } else if (key == "agent_init_offset") {
        c.agent_init_offset = number(key, value);
    } else if (key == "agent_init_cov") {
        c.agent_init_cov = square(key, value, 4);
    } else if (key == "anchor_init_cov") {
        c.anchor_init_cov = square(key, value, 4);
    } else if (key == "target_init_cov") {
        c.target_init_cov = square(key, value, 4);
    } else {
        return false;
    }
    return true;
}

void put_matrix(std::ostream& out, const char* key, const Matrix& m) {
    out << key << " =";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << ' ' << m(i, j);
        }
    }
    out << '\n';
}

std::string shard_scale_name(ShardScaleRule r) { return r == ShardScaleRule::exact ? "exact" : "product"; }

} // namespace

ExperimentSpec builtin_spec(const std::string& name) {
    if (name != "paper-vi") {
        throw ConfigError("scenario", "unknown builtin '" + name + "'");
    }
    ExperimentSpec spec;
    spec.scenario = paper_config();
    spec.agents = paper_agents();
    spec.targets = paper_targets();
    spec.filter.existence_threshold = spec.scenario.existence_threshold;
    return spec;
}

bool apply_filter_key(FilterConfig& config, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "variant") {
        try {
            config.variant = parse_variant(v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key, e.what());
        }
    } else if (key == "outer_iters") {
        config.outer_iters = integer(key, v);
    } else if (key == "gibbs_iters") {
        config.gibbs_iters = integer(key, v);
    } else if (key == "gibbs_top") {
        config.gibbs_top = static_cast<std::size_t>(std::max(0, integer(key, v)));
    } else if (key == "consensus_iters") {
        config.consensus_iters = integer(key, v);
    } else if (key == "max_components") {
        config.max_components = static_cast<std::size_t>(std::max(0, integer(key, v)));
    } else if (key == "weight_floor") {
        config.weight_floor = number(key, v);
    } else if (key == "inner_bp_max_iters") {
        config.inner_bp.max_iters = integer(key, v);
    } else if (key == "inner_bp_tol") {
        config.inner_bp.tol = number(key, v);
    } else if (key == "eta_floor") {
        config.messages.eta_floor = number(key, v);
    } else if (key == "distinct_weight_mode") {
        config.distinct_weight_mode = to_bool(key, v);
    } else if (key == "shard_scale") {
        if (v == "exact") {
            config.shard_scale = ShardScaleRule::exact;
        } else if (v == "product") {
            config.shard_scale = ShardScaleRule::product_of_scales;
        } else {
            throw ConfigError(key, "expected exact or product, got '" + v + "'");
        }
    } else {
        return false;
    }
    return true;
}

ExperimentSpec parse_spec(std::istream& in) {
    ExperimentSpec spec = builtin_spec("paper-vi");
    std::vector<AgentTrackSpec> agents;
    std::vector<TargetTrackSpec> targets;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "agent") {
            agents.push_back(parse_agent(value));
        } else if (key == "target") {
            targets.push_back(parse_target(value));
        } else if (!apply_scenario_key(spec, key, value) && !apply_filter_key(spec.filter, key, value)) {
            throw ConfigError(key, "unknown key on line " + std::to_string(line_no));
        }
    }
    if (!agents.empty()) {
        spec.agents = std::move(agents);
    }
    if (!targets.empty()) {
        spec.targets = std::move(targets);
    }
    return spec;
}

ExperimentSpec load_spec(const std::string& builtin_or_path) {
    if (builtin_or_path == "paper-vi") {
        return builtin_spec(builtin_or_path);
    }
    std::ifstream in(builtin_or_path);
    if (!in) {
        throw ConfigError("scenario", "cannot open '" + builtin_or_path + "'");
    }
    return parse_spec(in);
}

void write_spec(std::ostream& out, const ExperimentSpec& spec) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    const auto& c = spec.scenario;
    const auto& f = spec.filter;
    out << "# scsmtt experiment configuration\n";
    out << "steps = " << c.steps << '\n';
    out << "ts = " << c.ts << '\n';
    out << "roi = " << c.roi.x_min << ' ' << c.roi.y_min << ' ' << c.roi.x_max << ' ' << c.roi.y_max << '\n';
    out << "sigma_q_target = " << c.sigma_q_target << '\n';
    out << "sigma_q_agent = " << c.sigma_q_agent << '\n';
    put_matrix(out, "R", c.sensor.R);
    put_matrix(out, "W", c.sensor.W);
    out << "p_detect = " << c.sensor.p_detect << '\n';
    out << "clutter_rate = " << c.sensor.clutter_rate << '\n';
    out << "p_survival = " << c.p_survival << '\n';
    out << "p_birth = " << c.p_birth << '\n';
    out << "existence_threshold = " << c.existence_threshold << '\n';
    out << "ospa_cutoff = " << c.ospa_cutoff << '\n';
    out << "ospa_order = " << c.ospa_order << '\n';
    out << "agent_init_offset = " << c.agent_init_offset << '\n';
    put_matrix(out, "agent_init_cov", c.agent_init_cov);
    put_matrix(out, "anchor_init_cov", c.anchor_init_cov);
    put_matrix(out, "target_init_cov", c.target_init_cov);
    out << "\n# name anchor meas_range comm_range px py vx vy\n";
    for (const auto& a : spec.agents) {
        out << "agent = " << a.spec.name << ' ' << (a.spec.anchor ? "true" : "false") << ' ' << a.spec.meas_range
            << ' ' << a.spec.comm_range;
        for (Eigen::Index i = 0; i < 4; ++i) {
            out << ' ' << a.initial_state(i);
        }
        out << '\n';
    }
    out << "\n# birth death px py vx vy\n";
    for (const auto& k : spec.targets) {
        out << "target = " << k.birth << ' ' << k.death;
        for (Eigen::Index i = 0; i < 4; ++i) {
            out << ' ' << k.initial_state(i);
        }
        out << '\n';
    }
    out << "\nvariant = " << to_string(f.variant) << '\n';
    out << "outer_iters = " << f.outer_iters << '\n';
    out << "gibbs_iters = " << f.gibbs_iters << '\n';
    out << "gibbs_top = " << f.gibbs_top << '\n';
    out << "consensus_iters = " << f.consensus_iters << '\n';
    out << "max_components = " << f.max_components << '\n';
    out << "weight_floor = " << f.weight_floor << '\n';
    out << "inner_bp_max_iters = " << f.inner_bp.max_iters << '\n';
    out << "inner_bp_tol = " << f.inner_bp.tol << '\n';
    out << "eta_floor = " << f.messages.eta_floor << '\n';
    out << "distinct_weight_mode = " << (f.distinct_weight_mode ? "true" : "false") << '\n';
    out << "shard_scale = " << shard_scale_name(f.shard_scale) << '\n';
    out.precision(old_precision);
}

Scenario build_scenario(const ExperimentSpec& spec) {
    return assemble_scenario(spec.scenario, straight_line_truth(spec.scenario.steps, spec.scenario.ts, spec.agents,
                                                                spec.targets));
}

void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
    out << "t,id,px,py,vx,vy\n";
    for (int t = 0; t < truth.steps; ++t) {
        for (std::size_t id = 0; id < truth.targets.size(); ++id) {
            const auto& k = truth.targets[id];
            if (!k.alive(t)) {
                continue;
            }
            const Vector& x = k.at(t);
            out << t << ',' << id << ',' << x(0) << ',' << x(1) << ',' << x(2) << ',' << x(3) << '\n';
        }
    }
}

std::string config_schema() {
    return R"(Configuration file: one "key = value" per line, '#' starts a comment.
Unset keys keep the builtin paper-vi values. Matrices take either their diagonal
or all entries in row-major order.

Scenario keys
  steps                int     number of time steps
  ts                   real    sampling period [s]
  roi                  4 reals x_min y_min x_max y_max [m]
  sigma_q_target       real    target process noise intensity
  sigma_q_agent        real    mobile agent process noise intensity
  R                    2x2     target measurement noise (range [m^2], bearing [rad^2])
  W                    2x2     inter-agent measurement noise
  p_detect             real    detection probability
  clutter_rate         real    mean clutter count per agent and step
  p_survival           real    target survival probability
  p_birth              real    existence probability of a newborn PT
  existence_threshold  real    confirmation threshold on existence
  ospa_cutoff          real    OSPA cutoff c [m]
  ospa_order           real    OSPA order p
  agent_init_offset    real    offset of the four mobile prior components [m]
  agent_init_cov       4x4     mobile agent prior component covariance
  anchor_init_cov      4x4     anchor prior covariance
  target_init_cov      4x4     birth covariance
  agent                name anchor meas_range comm_range px py vx vy (repeatable)
  target               birth death px py vx vy (repeatable, death -1 for never)

Filter keys
  variant              CGM | DGM | CG | DG | CGM-SPAWN | CG-SPAWN
  outer_iters          int     outer message passing iterations per step
  gibbs_iters          int     Gibbs sweeps, or decentralized sampler rounds
  gibbs_top            int     retained label vectors
  consensus_iters      int     consensus rounds Q
  max_components       int     mixture truncation size
  weight_floor         real    relative weight below which components are pruned
  inner_bp_max_iters   int     association loop iteration cap
  inner_bp_tol         real    association loop tolerance
  eta_floor            real    association probability below which no terms are formed
  distinct_weight_mode bool    decentralized archive keyed by weight instead of labels
  shard_scale          exact | product   scale rule of single-Gaussian fusion
)";
}

} // namespace scsmtt
