#pragma once

// Config-driven pipeline: curve → solution → surface → geometry → exports, plus the invariant suite.
// Config files are INI (key = value, [sections]); reports are INI with 17-significant-digit floats.

#include "toda/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace toda {

struct RunConfig {
    // curve: (a0, c) or a report written by `curve`
    cplx a0{1.0, 0.0};
    double c = 0.0;
    std::string curve_report;  // empty: build from (a0, c)
    int N = 1;
    int m = 1;
    cplx lambda{1.0, 0.0};
    std::string source = "theta";     // theta | synthetic
    std::string field = "transported";  // transported | killing
    std::uint64_t seed = 7;
    CMat L0;  // hermitian seed of the transported field
    double x_min = -0.3, x_max = 0.3, y_min = -0.3, y_max = 0.3;
    int nx = 21, ny = 21;
    double residual_tol = 1e-5;
    double sphere_tol = 1e-6;
    double u_scale = 1.0;  // ≠ 1 turns the jets into non-solution data (negative control)
    std::filesystem::path out_dir = "out";

    GridSpec grid() const;
    // Validation naming the offending key; OffUnitCircle for |λ| ≠ 1
    void validate() const;
};

// throws Validation naming the first missing required key
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

// key = value report writer with stable keys, [section] grouping and 17 significant digits
class Report {
public:
    void put(const std::string& key, double v);
    void put(const std::string& key, cplx v);  // key_re, key_im
    void put(const std::string& key, int v);
    void put(const std::string& key, bool v);
    void put(const std::string& key, const std::string& v);
    void write(std::ostream& os) const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;  // "section.key", value
};
std::string fmt17(double v);

// theta data from a curve report
TodaThetaData read_theta_report(const std::filesystem::path& path);

// Each command writes its files under cfg.out_dir and throws toda::Error on failure (after writing
// whatever diagnostics exist); `log` receives one line per stage.
void cmd_curve(const RunConfig& cfg, std::ostream& log);
void cmd_solve(const RunConfig& cfg, std::ostream& log);
void cmd_surface(const RunConfig& cfg, std::ostream& log);

struct CheckItem {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool upper = true;  // pass iff value < tolerance (else value > tolerance)
    bool pass() const { return upper ? value < tolerance : value > tolerance; }
};
// theta periodicity, ∂-Lax identities, pure-gauge Gauss–Weingarten residuals, su(2) closed forms.
// inject_fault perturbs the ℒ₂ term of the su(2) m = 2 Lax matrix.
std::vector<CheckItem> run_check_suite(bool inject_fault = false);
std::string check_json(const std::vector<CheckItem>& items);

// OBJ of a grid surface: one vertex per unmasked point, two triangles per full cell, one triangle
// for a cell with a single masked corner
void write_obj(std::ostream& os, const GridSpec& g, const std::vector<RVec>& xyz, const std::vector<bool>& mask);

// ∂-Lax residual of the su(2) P, Q, R Lax matrix of degree m on `trials` random stationary jets;
// eps adds eps·ℒ₂ to the λ⁰ coefficient of Q (m = 2 only)
double su2_lax_check(int m, int trials, std::uint64_t seed, double eps = 0.0);
// same for the su(3) n = 1 gauged matrix from the recursion
double su3_lax_check(int trials, std::uint64_t seed);

}  // namespace toda
