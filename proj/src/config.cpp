#include "tns/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace tns {

namespace {

using Entries = std::map<std::string, std::vector<std::string>>;

Entries read_entries(std::istream& in) {
    Entries out;
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        out[item.fullname()] = item.inputs;
    }
    return out;
}

std::string single(const std::string& key, const std::vector<std::string>& v) {
    if (v.size() != 1) throw ConfigError("config key '" + key + "' expects one value");
    return v.front();
}

template <class T>
T parse_number(const std::string& key, const std::string& s) {
    T value{};
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError("config key '" + key + "': cannot parse '" + s + "' as a number");
    return value;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config key '" + key + "': cannot parse '" + s + "' as a boolean");
}

/// Consumes the run-level keys from e.
void apply_run(RunSpec& spec, Entries& e) {
    auto take = [&e](const std::string& key, auto&& fn) {
        auto it = e.find(key);
        if (it == e.end()) return;
        fn(single(key, it->second));
        e.erase(it);
    };
    take("mesh.n_cells", [&](const std::string& v) { spec.n_cells = parse_number<int>("mesh.n_cells", v); });
    take("scheme.scheme", [&](const std::string& v) {
        try {
            spec.scheme.scheme = scheme_from_string(v);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
        }
    });
    take("scheme.case", [&](const std::string& v) {
        try {
            spec.scheme.convective = convective_case_from_int(parse_number<int>("scheme.case", v));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
        }
    });
    take("scheme.nu", [&](const std::string& v) { spec.scheme.nu = parse_number<double>("scheme.nu", v); });
    take("scheme.T", [&](const std::string& v) { spec.scheme.T = parse_number<double>("scheme.T", v); });
    take("scheme.N", [&](const std::string& v) { spec.scheme.N = parse_number<int>("scheme.N", v); });
    take("scheme.picard_tol",
         [&](const std::string& v) { spec.scheme.picard_tol = parse_number<double>("scheme.picard_tol", v); });
    take("scheme.picard_max_iters", [&](const std::string& v) {
        spec.scheme.picard_max_iters = parse_number<int>("scheme.picard_max_iters", v);
    });
    take("scheme.c1", [&](const std::string& v) { spec.scheme.c1 = parse_number<double>("scheme.c1", v); });
    take("scheme.C_cnle", [&](const std::string& v) { spec.scheme.C_cnle = parse_number<double>("scheme.C_cnle", v); });
    take("datum.preset", [&](const std::string& v) { spec.datum = v; });
    take("datum.seed", [&](const std::string& v) { spec.seed = parse_number<std::uint64_t>("datum.seed", v); });
    take("datum.degree", [&](const std::string& v) { spec.degree = parse_number<int>("datum.degree", v); });
    take("datum.amplitude", [&](const std::string& v) { spec.amplitude = parse_number<double>("datum.amplitude", v); });
    take("output.dir", [&](const std::string& v) { spec.out_dir = v; });
    take("diagnostics.local_energy",
         [&](const std::string& v) { spec.local_energy = parse_bool("diagnostics.local_energy", v); });
    take("diagnostics.cn_threshold",
         [&](const std::string& v) { spec.cn_threshold = parse_number<double>("diagnostics.cn_threshold", v); });
}

void reject_leftovers(const Entries& e) {
    if (e.empty()) return;
    std::string keys;
    for (const auto& [k, v] : e) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + keys);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_run_sections(const RunSpec& s, std::ostream& os) {
    os << "[mesh]\n"
       << "n_cells = " << s.n_cells << "\n\n"
       << "[scheme]\n"
       << "scheme = " << to_string(s.scheme.scheme) << '\n'
       << "case = " << to_int(s.scheme.convective) << '\n'
       << "nu = " << format_double(s.scheme.nu) << '\n'
       << "T = " << format_double(s.scheme.T) << '\n'
       << "N = " << s.scheme.N << '\n'
       << "picard_tol = " << format_double(s.scheme.picard_tol) << '\n'
       << "picard_max_iters = " << s.scheme.picard_max_iters << '\n'
       << "c1 = " << format_double(s.scheme.c1) << '\n'
       << "C_cnle = " << format_double(s.scheme.C_cnle) << "\n\n"
       << "[datum]\n"
       << "preset = " << s.datum << '\n'
       << "seed = " << s.seed << '\n'
       << "degree = " << s.degree << '\n'
       << "amplitude = " << format_double(s.amplitude) << "\n\n"
       << "[output]\n"
       << "dir = \"" << s.out_dir << "\"\n\n"
       << "[diagnostics]\n"
       << "local_energy = " << (s.local_energy ? "true" : "false") << '\n'
       << "cn_threshold = " << format_double(s.cn_threshold) << '\n';
}

std::ifstream open_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return in;
}

}  // namespace

void RunSpec::validate() const {
    if (n_cells < 2) throw ConfigError("mesh.n_cells must be >= 2");
    try {
        scheme.validate();
        (void)datum_preset(datum, seed, degree, amplitude);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (degree < 1) throw ConfigError("datum.degree must be >= 1");
    if (!(cn_threshold > 0.0)) throw ConfigError("diagnostics.cn_threshold must be positive");
}

TrigVectorField RunSpec::datum_field() const { return datum_preset(datum, seed, degree, amplitude); }

void StudySpec::validate() const {
    base.validate();
    if (levels.size() < 2) throw ConfigError("a study needs at least 2 levels");
    for (int n : levels)
        if (n < 2) throw ConfigError("study levels must be >= 2");
    if (!(alpha > 0.0)) throw ConfigError("study.alpha must be positive");
    if (!(C > 0.0)) throw ConfigError("study.C must be positive");
    if (strict && base.scheme.scheme == Scheme::CN && !(alpha > 0.5))
        throw ConfigError("study.alpha must exceed 1/2 for CN in strict coupling mode");
}

int StudySpec::steps_for(double h) const {
    const double target = C * std::pow(h, alpha);
    return std::max(1, static_cast<int>(std::lround(base.scheme.T / target)));
}

RunSpec parse_run_spec(std::istream& in) {
    Entries e = read_entries(in);
    RunSpec spec;
    apply_run(spec, e);
    reject_leftovers(e);
    spec.validate();
    return spec;
}

StudySpec parse_study_spec(std::istream& in) {
    Entries e = read_entries(in);
    StudySpec spec;
    apply_run(spec.base, e);
    if (auto it = e.find("study.levels"); it != e.end()) {
        spec.levels.clear();
        for (const auto& v : it->second) spec.levels.push_back(parse_number<int>("study.levels", v));
        e.erase(it);
    }
    if (auto it = e.find("study.alpha"); it != e.end()) {
        spec.alpha = parse_number<double>("study.alpha", single("study.alpha", it->second));
        e.erase(it);
    }
    if (auto it = e.find("study.C"); it != e.end()) {
        spec.C = parse_number<double>("study.C", single("study.C", it->second));
        e.erase(it);
    }
    if (auto it = e.find("study.strict"); it != e.end()) {
        spec.strict = parse_bool("study.strict", single("study.strict", it->second));
        e.erase(it);
    }
    reject_leftovers(e);
    spec.validate();
    return spec;
}

RunSpec load_run_spec(const std::string& path) {
    auto in = open_config(path);
    return parse_run_spec(in);
}

StudySpec load_study_spec(const std::string& path) {
    auto in = open_config(path);
    return parse_study_spec(in);
}

void write_run_spec(const RunSpec& spec, std::ostream& os) { write_run_sections(spec, os); }

void write_study_spec(const StudySpec& spec, std::ostream& os) {
    write_run_sections(spec.base, os);
    os << "\n[study]\nlevels = ";
    for (std::size_t i = 0; i < spec.levels.size(); ++i) os << (i ? "," : "") << spec.levels[i];
    os << "\nalpha = " << format_double(spec.alpha) << "\nC = " << format_double(spec.C)
       << "\nstrict = " << (spec.strict ? "true" : "false") << '\n';
}

}  // namespace tns
