#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "statbench/util.hpp"

namespace statbench {

/// Normal-approximation half-width for a binomial proportion, in percentage
/// points (90% confidence by default, z = 1.6449).
double wald_ci_half_width(int correct, int total, double confidence = 0.90);

/// One-sided upper-tail p-value of Welch's unequal-variances t-test applied
/// to per-case Bernoulli outcomes (c1 successes of n1 vs c2 of n2).
double welch_one_sided_p(int c1, int n1, int c2, int n2);

/// Upper-tail probability P(T > t) for Student's t with df degrees of freedom.
double student_t_sf(double t, double df);

/// Inverse standard normal CDF.
double normal_quantile(double p);

struct AccuracyCell {
    int correct = 0;
    int total = 0;
    double ci_half_width_pts = 0.0;
};

AccuracyCell make_cell(int correct, int total, double confidence = 0.90);

/// "60 ± 10 (43/72)" with the half-width displayed as the ceiling of the raw
/// value; "78 (779/1000)" without the interval.
std::string format_cell(const AccuracyCell& cell, bool with_ci = true);

/// Parses either format back to (correct, total).
AccuracyCell parse_cell(std::string_view text);

struct ErrorTaxonomy {
    int false_positive = 0;
    int false_negative = 0;
    int indeterminate = 0;

    int sum() const { return false_positive + false_negative + indeterminate; }
};

struct StratumSummary {
    std::string stratum;
    AccuracyCell cell;
    ErrorTaxonomy errors;
    int transport_failures = 0;
};

struct RunSummary {
    std::vector<StratumSummary> strata;  // sorted by stratum key
    StratumSummary overall;              // stratum = "aggregate"
    nlohmann::json metadata;
};

/// Folds evaluation records (as produced by the eval drivers) into per-stratum
/// accuracy cells and an error taxonomy. Records must carry "stratum",
/// "correct" and "category" fields; transport failures are excluded from
/// accuracy denominators and counted separately. Permutation-invariant.
RunSummary aggregate(const std::vector<nlohmann::json>& records);

std::string render_table(const RunSummary& summary);
std::string render_csv(const RunSummary& summary);
nlohmann::json summary_to_json(const RunSummary& summary);

}  // namespace statbench
