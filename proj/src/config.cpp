#include "catgeo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace catgeo {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + v + "'");
}

template <typename T, typename Fn>
std::vector<T> to_list(const std::string& v, Fn&& parse) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse(trim(item)));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    return os.str();
}

struct Key {
    std::string name;
    std::function<void(TrainConfig&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

#define CATGEO_DOUBLE_KEY(name, field)                                                        \
    Key {                                                                                     \
        name, [](TrainConfig& c, const std::string& v) { c.field = to_double(name, v); },     \
            [](const TrainConfig& c) { return num(c.field); }                                 \
    }
#define CATGEO_UINT_KEY(name, field)                                                          \
    Key {                                                                                     \
        name, [](TrainConfig& c, const std::string& v) { c.field = to_uint(name, v); },       \
            [](const TrainConfig& c) { return std::to_string(c.field); }                      \
    }
#define CATGEO_BOOL_KEY(name, field)                                                          \
    Key {                                                                                     \
        name, [](TrainConfig& c, const std::string& v) { c.field = to_bool(name, v); },       \
            [](const TrainConfig& c) { return std::string(c.field ? "true" : "false"); }      \
    }

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        CATGEO_UINT_KEY("epochs", epochs),
        CATGEO_UINT_KEY("batch_size", batch_size),
        CATGEO_DOUBLE_KEY("lr", lr),
        CATGEO_DOUBLE_KEY("momentum", momentum),
        CATGEO_DOUBLE_KEY("weight_decay", weight_decay),
        CATGEO_DOUBLE_KEY("epsilon", epsilon),
        CATGEO_DOUBLE_KEY("sigma", sinkhorn.sigma),
        Key{"sinkhorn_iters",
            [](TrainConfig& c, const std::string& v) { c.sinkhorn.max_iters = static_cast<int>(to_uint("sinkhorn_iters", v)); },
            [](const TrainConfig& c) { return std::to_string(c.sinkhorn.max_iters); }},
        CATGEO_DOUBLE_KEY("sinkhorn_tol", sinkhorn.tol),
        CATGEO_BOOL_KEY("negate_cost", sinkhorn.negate_cost),
        CATGEO_UINT_KEY("M", num_props),
        Key{"widths",
            [](TrainConfig& c, const std::string& v) {
                c.widths = to_list<std::size_t>(v, [](const std::string& s) {
                    return static_cast<std::size_t>(to_uint("widths", s));
                });
            },
            [](const TrainConfig& c) { return join(c.widths); }},
        CATGEO_DOUBLE_KEY("lambda1", lambda1),
        CATGEO_DOUBLE_KEY("lambda2", lambda2),
        CATGEO_BOOL_KEY("seg_on_augmented", seg_on_augmented),
        CATGEO_BOOL_KEY("standard_augment", standard_augment),
        CATGEO_DOUBLE_KEY("beta1", augment.beta1),
        CATGEO_DOUBLE_KEY("beta2", augment.beta2),
        CATGEO_DOUBLE_KEY("rho", augment.rho),
        CATGEO_DOUBLE_KEY("h1", augment.h1),
        CATGEO_DOUBLE_KEY("h2", augment.h2),
        CATGEO_DOUBLE_KEY("gamma1", augment.gamma1),
        CATGEO_DOUBLE_KEY("gamma2", augment.gamma2),
        CATGEO_DOUBLE_KEY("fog_alpha_max", augment.fog_alpha_max),
        CATGEO_DOUBLE_KEY("fog_threshold", augment.fog_threshold),
        CATGEO_BOOL_KEY("accumulate_all_points", augment.accumulate_all_points),
        Key{"tta_angles",
            [](TrainConfig& c, const std::string& v) {
                c.tta_angles_deg = to_list<double>(v, [](const std::string& s) { return to_double("tta_angles", s); });
            },
            [](const TrainConfig& c) { return join(c.tta_angles_deg); }},
        Key{"tta_scales",
            [](TrainConfig& c, const std::string& v) {
                c.tta_scales = to_list<double>(v, [](const std::string& s) { return to_double("tta_scales", s); });
            },
            [](const TrainConfig& c) { return join(c.tta_scales); }},
        CATGEO_UINT_KEY("seed", seed),
        Key{"output_dir", [](TrainConfig& c, const std::string& v) { c.output_dir = v; },
            [](const TrainConfig& c) { return c.output_dir.string(); }},
    };
    return table;
}

#undef CATGEO_DOUBLE_KEY
#undef CATGEO_UINT_KEY
#undef CATGEO_BOOL_KEY

}  // namespace

void TrainConfig::validate() const {
    if (batch_size == 0) throw std::invalid_argument("config: batch_size must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("config: momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("config: weight_decay must be >= 0");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("config: epsilon must lie in [0, 1]");
    sinkhorn.validate();
    if (num_props == 0) throw std::invalid_argument("config: M must be >= 1");
    if (widths.size() < 2 || widths.front() != 4)
        throw std::invalid_argument("config: widths must start with the input width 4 and end with D");
    augment.validate();
    if (tta_angles_deg.empty() || tta_scales.empty())
        throw std::invalid_argument("config: TTA transform grid must be non-empty");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

void apply_config(TrainConfig& cfg, const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) {
        bool found = false;
        for (const auto& key : keys()) {
            if (key.name == k) {
                key.set(cfg, v);
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("config: unknown key '" + k + "'");
    }
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& k : keys()) out.push_back(k.name);
        return out;
    }();
    return names;
}

std::string to_text(const TrainConfig& cfg) {
    std::string out;
    for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

}  // namespace catgeo
