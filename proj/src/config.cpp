#include "harris/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace harris {

namespace {

std::pair<std::string, std::string> split_head(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) return {text, ""};
    return {text.substr(0, colon), text.substr(colon + 1)};
}

double to_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_number(item));
    return out;
}

CovarianceSpec parse_phi(const std::string& text) {
    const auto [head, args] = split_head(text);
    const auto v = parse_number_list(args);
    CovarianceSpec s;
    if (head == "gaussian" && v.empty()) s = CovarianceSpec::gaussian();
    else if (head == "indicator" && v.empty()) s = CovarianceSpec::indicator();
    else if (head == "exp" && v.size() == 1) s = CovarianceSpec::exponential(v[0]);
    else if (head == "cosine" && v.size() == 2) s = CovarianceSpec::cosine(v[0], v[1]);
    else if (head == "cosine" && v.size() == 3) s = CovarianceSpec::cosine(v[0], v[1], static_cast<int>(v[2]));
    else throw std::invalid_argument("unrecognized covariance '" + text + "'");
    validate(s);
    return s;
}

DriftSpec parse_drift(const std::string& text) {
    const auto [head, args] = split_head(text);
    DriftSpec s;
    if (head == "zero" && args.empty()) {
        s = DriftSpec::zero();
    } else if (head == "affine") {
        const auto v = parse_number_list(args);
        if (v.size() != 2) throw std::invalid_argument("affine drift needs two numbers");
        s = DriftSpec::affine(v[0], v[1]);
    } else if (head == "lipschitz") {
        s = DriftSpec::lipschitz(args);
    } else if (head == "one_sided") {
        s = DriftSpec::one_sided(args);
    } else if (head == "modulus") {
        const auto v = parse_number_list(args);
        if (v.size() < 2 || v.size() > 3) throw std::invalid_argument("modulus drift needs beta,C_rho[,C_tilde_rho]");
        s = DriftSpec::modulus(v[0], v[1], v.size() == 3 ? v[2] : 1.0);
    } else {
        throw std::invalid_argument("unrecognized drift '" + text + "'");
    }
    validate(s);
    return s;
}

CouplingMode parse_coupling(const std::string& text) {
    if (text == "shared_field") return CouplingMode::shared_field;
    if (text == "label_level") return CouplingMode::label_level;
    throw std::invalid_argument("unrecognized coupling '" + text + "'");
}

void validate(const ExperimentConfig& cfg) {
    parse_phi(cfg.phi);
    parse_drift(cfg.drift);
    parse_coupling(cfg.coupling);
    if (cfg.particles.empty()) throw std::invalid_argument("config: particles must not be empty");
    if (!(cfg.T > 0.0)) throw std::invalid_argument("config: T must be positive");
    if (!(cfg.dt_fine > 0.0)) throw std::invalid_argument("config: dt_fine must be positive");
    if (cfg.reps < 2) throw std::invalid_argument("config: reps must be at least 2");
    for (std::size_t N : cfg.partitions) {
        if (N == 0) throw std::invalid_argument("config: partition sizes must be positive");
        const double block = cfg.T / static_cast<double>(N);
        const double steps = std::round(block / cfg.dt_fine);
        if (steps < 1.0 || std::abs(steps * cfg.dt_fine - block) > 1e-9 * cfg.T)
            throw std::invalid_argument("config: dt_fine must divide T/N for N = " + std::to_string(N));
    }
    if (cfg.format != "csv" && cfg.format != "json") throw std::invalid_argument("config: format must be csv or json");
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["phi"] = c.phi;
    j["drift"] = c.drift;
    j["particles"] = c.particles;
    j["T"] = c.T;
    j["partitions"] = c.partitions;
    j["dt_fine"] = c.dt_fine;
    j["reps"] = c.reps;
    j["seed"] = c.seed;
    j["coupling"] = c.coupling;
    j["tol_merge"] = c.tol_merge;
    j["jitter"] = c.jitter;
    j["bridge_crossing"] = c.bridge_crossing;
    j["epsilon"] = c.epsilon ? nlohmann::json(*c.epsilon) : nlohmann::json(nullptr);
    j["grid_points"] = c.grid_points;
    j["check_times"] = c.check_times;
    j["trials"] = c.trials;
    j["null_trials"] = c.null_trials;
    j["gaps"] = c.gaps;
    j["n_grids"] = c.n_grids;
    j["interval_lo"] = c.interval_lo;
    j["interval_hi"] = c.interval_hi;
    j["dyadic_level"] = c.dyadic_level;
    j["output"] = c.output;
    j["format"] = c.format;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    ExperimentConfig c = std::move(base);
    const nlohmann::json known = to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
        (void)value;
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    try {
        get("phi", c.phi);
        get("drift", c.drift);
        get("particles", c.particles);
        get("T", c.T);
        get("partitions", c.partitions);
        get("dt_fine", c.dt_fine);
        get("reps", c.reps);
        get("seed", c.seed);
        get("coupling", c.coupling);
        get("tol_merge", c.tol_merge);
        get("jitter", c.jitter);
        get("bridge_crossing", c.bridge_crossing);
        if (j.contains("epsilon") && !j.at("epsilon").is_null()) c.epsilon = j.at("epsilon").get<double>();
        get("grid_points", c.grid_points);
        get("check_times", c.check_times);
        get("trials", c.trials);
        get("null_trials", c.null_trials);
        get("gaps", c.gaps);
        get("n_grids", c.n_grids);
        get("interval_lo", c.interval_lo);
        get("interval_hi", c.interval_hi);
        get("dyadic_level", c.dyadic_level);
        get("output", c.output);
        get("format", c.format);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config '" + path + "': " + e.what());
    }
    return config_from_json(j, std::move(base));
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    nlohmann::json j = to_json(cfg);
    j.erase("output");
    j.erase("format");
    return fnv1a64(j.dump());
}

SimConfig sim_config(const ExperimentConfig& cfg) {
    SimConfig s;
    s.dt_fine = cfg.dt_fine;
    s.tol_merge = cfg.tol_merge;
    s.jitter = cfg.jitter;
    s.bridge_crossing = cfg.bridge_crossing;
    return s;
}

}  // namespace harris
