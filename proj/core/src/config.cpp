#include "revcap/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "revcap/errors.hpp"

namespace revcap {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& v, int line) {
    if (v == "inf" || v == "+inf") return kInf;
    if (v == "-inf") return -kInf;
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + v + "'", line);
    }
}

std::function<double(double)> parse_preset(const std::string& spec, int line) {
    std::istringstream ss(spec);
    std::string name;
    ss >> name;
    if (name == "identity") return [](double d) { return d; };
    if (name == "square") return [](double d) { return d * d; };
    if (name == "affine") {
        double a, b;
        if (!(ss >> a >> b)) throw ConfigError("affine preset needs two coefficients", line);
        return [a, b](double d) { return a * d + b; };
    }
    if (name == "power") {
        double p;
        if (!(ss >> p)) throw ConfigError("power preset needs an exponent", line);
        return [p](double d) { return std::pow(d, p); };
    }
    throw ConfigError("unknown cost preset '" + name + "' (identity|square|affine A B|power P)",
                      line);
}

class Blocks {
public:
    explicit Blocks(const std::string& text) {
        std::istringstream in(text);
        std::string raw, section;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError("unterminated section header", line);
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("expected key = value", line);
            if (section.empty()) throw ConfigError("key outside any [section]", line);
            const std::string key = trim(s.substr(0, eq));
            sections_[section][key] = {trim(s.substr(eq + 1)), line, false};
        }
    }

    bool has(const std::string& sec, const std::string& key) const {
        const auto it = sections_.find(sec);
        return it != sections_.end() && it->second.count(key) > 0;
    }
    Entry& at(const std::string& sec, const std::string& key) {
        auto& e = sections_.at(sec).at(key);
        e.used = true;
        return e;
    }
    double real(const std::string& sec, const std::string& key, double fallback) {
        if (!has(sec, key)) return fallback;
        auto& e = at(sec, key);
        return parse_real(e.value, e.line);
    }
    double real_required(const std::string& sec, const std::string& key) {
        if (!has(sec, key)) throw ConfigError("missing required key " + sec + "." + key);
        auto& e = at(sec, key);
        return parse_real(e.value, e.line);
    }
    std::string text(const std::string& sec, const std::string& key, const std::string& fallback) {
        if (!has(sec, key)) return fallback;
        return at(sec, key).value;
    }
    int entry_line(const std::string& sec, const std::string& key) {
        return sections_.at(sec).at(key).line;
    }

private:
    std::map<std::string, Section> sections_;
};

}  // namespace

ProblemSpec parse_config_text(const std::string& text) {
    Blocks blocks(text);
    ProblemSpec spec;

    // --- diffusion ----------------------------------------------------------
    const std::string kind = blocks.text("diffusion", "kind", "gbm");
    if (kind != "gbm")
        throw ConfigError("kind '" + kind + "' not supported by the config front end (use gbm; "
                          "generic diffusions go through the library API)");
    const double mu = blocks.real_required("diffusion", "mu");
    const double sigma = blocks.real_required("diffusion", "sigma");
    const double rho = blocks.real_required("diffusion", "rho");
    const double d_min = blocks.real("diffusion", "d_min", 0.0);
    const double d_max = blocks.real("diffusion", "d_max", kInf);
    double d0;
    if (blocks.has("diffusion", "d0")) {
        d0 = blocks.real_required("diffusion", "d0");
    } else {
        // geometric midpoint when the interval allows it, else 1
        if (d_min > 0 && std::isfinite(d_max))
            d0 = std::sqrt(d_min * d_max);
        else if (std::isfinite(d_min) && std::isfinite(d_max))
            d0 = 0.5 * (d_min + d_max);
        else
            d0 = std::max(1.0, 2.0 * d_min);
        spec.warnings.push_back("d0 missing; defaulted to " + std::to_string(d0));
    }
    const double bound = std::max(0.0, 2.0 * mu + sigma * sigma);
    if (!(rho > bound))
        throw ConfigError("discount condition violated: rho must exceed max(0, 2*mu + sigma^2) = " +
                          std::to_string(bound) + " for a GBM demand with quadratic cost");
    spec.model = DiffusionModel::gbm(mu, sigma, rho, d0);
    spec.model.d_min = d_min;
    spec.model.d_max = d_max;
    spec.model.validate();

    // --- cost ---------------------------------------------------------------
    spec.cost_alpha0_desc = blocks.text("cost", "alpha0", "square");
    spec.cost_beta0_desc = blocks.text("cost", "beta0", "identity");
    const int a_line = blocks.has("cost", "alpha0") ? blocks.entry_line("cost", "alpha0") : 0;
    const int b_line = blocks.has("cost", "beta0") ? blocks.entry_line("cost", "beta0") : 0;
    auto alpha0 = parse_preset(spec.cost_alpha0_desc, a_line);
    auto beta0 = parse_preset(spec.cost_beta0_desc, b_line);
    const double q_plus = blocks.real_required("cost", "q_plus");
    const double q_minus = blocks.real("cost", "q_minus", kInf);

    // --- numerics ------------------------------------------------------------
    NumericsSpec n;
    n.c_lo = blocks.real("numerics", "c_lo", n.c_lo);
    n.c_hi = blocks.real("numerics", "c_hi", n.c_hi);
    n.c_points = static_cast<int>(blocks.real("numerics", "c_points", n.c_points));
    n.d_lo = blocks.real("numerics", "d_lo", n.d_lo);
    n.d_hi = blocks.real("numerics", "d_hi", n.d_hi);
    n.d_points = static_cast<int>(blocks.real("numerics", "d_points", n.d_points));
    n.dt = blocks.real("numerics", "dt", n.dt);
    n.horizon = blocks.real("numerics", "horizon", 0.0);
    n.n_paths = static_cast<long>(blocks.real("numerics", "n_paths", n.n_paths));
    n.seed = static_cast<std::uint64_t>(blocks.real("numerics", "seed", 1.0));
    n.tolerance = blocks.real("numerics", "tolerance", n.tolerance);
    n.n_middle = static_cast<int>(blocks.real("numerics", "n_middle", n.n_middle));
    n.n_onesided = static_cast<int>(blocks.real("numerics", "n_onesided", n.n_onesided));
    n.grid = static_cast<int>(blocks.real("numerics", "grid", n.grid));
    if (!(n.c_lo < n.c_hi)) throw ConfigError("numerics: c_lo < c_hi required");
    if (!(n.d_lo < n.d_hi) || !spec.model.interior(n.d_lo) || !spec.model.interior(n.d_hi))
        throw ConfigError("numerics: need interior d_lo < d_hi");
    if (!(n.dt > 0)) throw ConfigError("numerics: dt must be positive");
    spec.num = n;

    spec.cost = make_quadratic_cost(std::move(alpha0), std::move(beta0), q_plus, q_minus, n.d_lo,
                                    n.d_hi);
    return spec;
}

ProblemSpec parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace revcap
