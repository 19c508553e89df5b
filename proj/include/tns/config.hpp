// Run and study specifications and their flat "key = value" text form.
//
//   [mesh]        n_cells
//   [scheme]      scheme, case, nu, T, N, picard_tol, picard_max_iters, c1, C_cnle
//   [datum]       preset, seed, degree, amplitude
//   [output]      dir
//   [diagnostics] local_energy, cn_threshold
//   [study]       levels, alpha, C, strict
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tns/steppers.hpp"

namespace tns {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunSpec {
    int n_cells = 3;
    SchemeConfig scheme;
    std::string datum = "tg-like";
    std::uint64_t seed = 0;
    int degree = 2;
    double amplitude = 1.0;
    std::string out_dir = "out";
    bool local_energy = true;
    double cn_threshold = 1.0;

    /// Throws ConfigError.
    void validate() const;
    [[nodiscard]] TrigVectorField datum_field() const;
};

struct StudySpec {
    RunSpec base;
    std::vector<int> levels{2, 3, 4};
    double alpha = 0.6;
    double C = 0.05;
    bool strict = true;

    /// Throws ConfigError, including alpha <= 1/2 for CN in strict mode.
    void validate() const;
    /// N = max(1, round(T / (C h^alpha))), so dt = T / N tracks C h^alpha.
    [[nodiscard]] int steps_for(double h) const;
};

[[nodiscard]] RunSpec parse_run_spec(std::istream& in);
[[nodiscard]] StudySpec parse_study_spec(std::istream& in);
[[nodiscard]] RunSpec load_run_spec(const std::string& path);
[[nodiscard]] StudySpec load_study_spec(const std::string& path);

void write_run_spec(const RunSpec& spec, std::ostream& os);
void write_study_spec(const StudySpec& spec, std::ostream& os);

}  // namespace tns
