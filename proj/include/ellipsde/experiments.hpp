#pragma once

#include "ellipsde/cutoff.hpp"
#include "ellipsde/fbm.hpp"
#include "ellipsde/grid.hpp"
#include "ellipsde/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ellipsde {

/// Builds a driving path from a descriptor:
///   file:PATH or a bare *.csv path   read with read_csv_file (its grid must have n subintervals)
///   fbm:H:SEED                       exact fBm sample
///   linear:A                         A t
///   sin:A:K                          A sin(K pi t)
///   weierstrass:ALPHA[:A]            A sum_{k<=30} 2^{-k ALPHA} sin(2^k sqrt(2) pi t + k), exactly ALPHA-Hölder
GridFunction make_path(const std::string& descriptor, std::size_t n);

/// The same descriptor on several grids. fBm paths are drawn once on the finest grid and
/// restricted, so every grid sees the same realization; the finest size must be a multiple of the others.
std::vector<GridFunction> make_path_family(const std::string& descriptor, const std::vector<std::size_t>& sizes);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
/// Least-squares line through (xs, ys); needs at least two points.
LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

struct ExperimentConfig {
    FbmConfig fbm{0.75, 256, 1};
    CutoffSpec spec{0.05, 0.1, 4, 0.55, CutoffFlavor::Garsia};
    std::string sigma = "tanh:0.05,0.01";
    SolverConfig solver{0.95, 1e-12, 200, 2.0};
    std::size_t N = 200;
    double t_eval = 0.5;
    double a = 0.002;
    std::string output_dir = "out";
    std::size_t threads = 0;  // 0: hardware concurrency
    std::string path = "fbm:0.75:1";  // driving path of single solves

    /// Throws InvalidInput on N = 0, a <= 0, or t_eval not an interior grid node.
    void validate() const;
};

/// Per-sample seed for index i of a run with base seed s; replayable through FbmConfig.
std::uint64_t sample_seed(std::uint64_t base, std::size_t index);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
};

enum class SampleStatus { OmegaA, BelowThreshold, Diverged };

struct SampleRecord {
    std::uint64_t seed = 0;
    SampleStatus status = SampleStatus::Diverged;
    double z_t = 0.0;
    double cutoff_value = 0.0;
    double cutoff_argument = 0.0;
    double h_norm = 0.0;  // only on Omega_a
    double negative_increment_fraction = 0.0;
    double negative_run_start = 0.0;
    double negative_run_end = 0.0;
    int iterations = 0;
    double contraction_ratio = 0.0;
    std::string message;  // divergence reason
};

struct DensityReport {
    std::size_t N_total = 0;
    std::size_t N_omega_a = 0;
    std::size_t N_below_threshold = 0;
    std::size_t N_diverged = 0;
    double positive_norm_fraction = 0.0;  // over Omega_a only; 0 when Omega_a is empty
    double min_h_norm_on_omega_a = 0.0;
    double min_cutoff_on_omega_a = 0.0;
    double max_argument_on_omega_a = 0.0;
    double fitted_C = 0.0;  // smallest C with cutoff_value >= a / C on Omega_a
    Histogram histogram;
    std::vector<std::uint64_t> seeds;
    std::vector<SampleRecord> samples;
};

/// Monte Carlo density study: fBm samples, localized equation, Malliavin norm on Omega_a.
/// Requires a nondegenerate sigma and the garsia flavor.
DensityReport density_experiment(const ExperimentConfig& cfg);

enum class StudyKind { Young, Solver, Malliavin };
StudyKind parse_study_kind(const std::string& s);
std::string to_string(StudyKind k);

struct StudyInputs {
    std::string path = "linear:1";        // x, or f for the young kind
    std::string integrand = "linear:1";   // g for the young kind
    std::string sigma = "const:0.1";
    CutoffSpec spec{};
    SolverConfig solver{};
    double t_eval = 0.5;
    double H = 0.75;
};

struct StudyRow {
    std::size_t n = 0;
    double value = 0.0;
    double difference = 0.0;  // to the next finer grid (0 on the last row), or to the exact limit
};

struct ConvergenceTable {
    StudyKind kind = StudyKind::Young;
    std::vector<StudyRow> rows;
    bool exact_reference = false;  // differences are errors against a known limit
    std::optional<LinearFit> fit;  // log difference vs log n, over rows with a positive difference
};

/// value(n) is: young, the left-point sum of g df over [0,1]; solver, z at t_eval (difference is the sup
/// over shared nodes); malliavin, |D z_{t_eval}|_{|H|}.
/// A young study with g and f given by the same descriptor measures the error against the exact limit
/// (f(1)^2 - f(0)^2) / 2, which the chain rule gives for any Young pair of a path with itself.
ConvergenceTable convergence_study(StudyKind kind, const std::vector<std::size_t>& sizes,
                                   const StudyInputs& in);

nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const DensityReport& r);
nlohmann::json to_json(const ConvergenceTable& t);
nlohmann::json to_json(const Solution& s);

}  // namespace ellipsde
