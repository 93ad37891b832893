#include "statbench/stats_report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace statbench {

using nlohmann::json;

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw ConfigError("normal_quantile requires p in (0,1)");
    // Acklam's rational approximation, |relative error| < 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    const double phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double wald_ci_half_width(int correct, int total, double confidence) {
    if (total < 1) throw ConfigError("wald_ci_half_width requires total >= 1");
    if (correct < 0 || correct > total) throw ConfigError("correct must lie in [0, total]");
    // Pinned value at the default confidence so results are bit-stable.
    const double z = confidence == 0.90 ? 1.6449 : normal_quantile(0.5 + confidence / 2.0);
    const double p = static_cast<double>(correct) / total;
    return z * std::sqrt(p * (1.0 - p) / total) * 100.0;
}

namespace {

double log_gamma(double x) { return std::lgamma(x); }

double beta_cf(double a, double b, double x) {
    // Continued fraction for the regularized incomplete beta (Lentz).
    const int kMaxIter = 300;
    const double kEps = 3e-14;
    const double kFpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpmin) d = kFpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpmin) d = kFpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpmin) c = kFpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpmin) d = kFpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpmin) c = kFpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_sf(double t, double df) {
    if (df <= 0) throw ConfigError("student_t_sf requires df > 0");
    const double x = df / (df + t * t);
    const double half_two_sided = 0.5 * reg_inc_beta(df / 2.0, 0.5, x);
    return t >= 0 ? half_two_sided : 1.0 - half_two_sided;
}

double welch_one_sided_p(int c1, int n1, int c2, int n2) {
    if (n1 < 2 || n2 < 2) throw ConfigError("welch_one_sided_p requires n >= 2 in both samples");
    if (c1 < 0 || c1 > n1 || c2 < 0 || c2 > n2) throw ConfigError("success counts out of range");
    const double p1 = static_cast<double>(c1) / n1;
    const double p2 = static_cast<double>(c2) / n2;
    // Unbiased sample variance of a Bernoulli sample.
    const double v1 = p1 * (1.0 - p1) * n1 / (n1 - 1.0);
    const double v2 = p2 * (1.0 - p2) * n2 / (n2 - 1.0);
    const double se2 = v1 / n1 + v2 / n2;
    const double kTiny = 1e-12;
    if (se2 <= 0.0) {
        if (p1 == p2) return 0.5;
        return p1 > p2 ? kTiny : 1.0 - kTiny;
    }
    const double t = (p1 - p2) / std::sqrt(se2);
    const double df = se2 * se2 / ((v1 / n1) * (v1 / n1) / (n1 - 1.0) + (v2 / n2) * (v2 / n2) / (n2 - 1.0));
    const double p = student_t_sf(t, df);
    return std::min(1.0 - kTiny, std::max(kTiny, p));
}

AccuracyCell make_cell(int correct, int total, double confidence) {
    AccuracyCell cell;
    cell.correct = correct;
    cell.total = total;
    cell.ci_half_width_pts = total > 0 ? wald_ci_half_width(correct, total, confidence) : 0.0;
    return cell;
}

std::string format_cell(const AccuracyCell& cell, bool with_ci) {
    if (cell.total == 0) return "- (0/0)";
    const long pct = std::lround(100.0 * cell.correct / cell.total);
    std::ostringstream out;
    out << pct;
    if (with_ci) {
        // Display policy: ceiling to the next whole point.
        out << " ± " << static_cast<long>(std::ceil(cell.ci_half_width_pts - 1e-9));
    }
    out << " (" << cell.correct << "/" << cell.total << ")";
    return out.str();
}

AccuracyCell parse_cell(std::string_view text) {
    const std::string s(text);
    const std::size_t open = s.rfind('(');
    const std::size_t slash = s.find('/', open);
    const std::size_t close = s.find(')', open);
    if (open == std::string::npos || slash == std::string::npos || close == std::string::npos) {
        throw ParseError("not an accuracy cell: " + s);
    }
    AccuracyCell cell;
    try {
        cell.correct = std::stoi(s.substr(open + 1, slash - open - 1));
        cell.total = std::stoi(s.substr(slash + 1, close - slash - 1));
    } catch (const std::exception&) {
        throw ParseError("not an accuracy cell: " + s);
    }
    if (cell.total > 0) cell.ci_half_width_pts = wald_ci_half_width(cell.correct, cell.total);
    return cell;
}

RunSummary aggregate(const std::vector<json>& records) {
    struct Bucket {
        int correct = 0;
        int total = 0;
        ErrorTaxonomy errors;
        int transport = 0;
    };
    std::map<std::string, Bucket> buckets;
    Bucket overall;

    auto fold = [](Bucket& b, const json& rec) {
        const std::string category = rec.value("category", "");
        if (category == "transport_error") {
            ++b.transport;
            return;
        }
        ++b.total;
        if (rec.value("correct", false)) {
            ++b.correct;
        } else if (category == "false_positive") {
            ++b.errors.false_positive;
        } else if (category == "false_negative") {
            ++b.errors.false_negative;
        } else if (category == "indeterminate") {
            ++b.errors.indeterminate;
        } else if (category == "incorrect") {
            // counted in total only; no taxonomy bucket
        }
    };

    for (const auto& rec : records) {
        const std::string stratum = rec.value("stratum", std::string("all"));
        fold(buckets[stratum], rec);
        fold(overall, rec);
    }

    RunSummary summary;
    summary.metadata = json::object();
    for (const auto& [key, b] : buckets) {
        StratumSummary s;
        s.stratum = key;
        s.cell = b.total > 0 ? make_cell(b.correct, b.total) : AccuracyCell{};
        s.errors = b.errors;
        s.transport_failures = b.transport;
        summary.strata.push_back(std::move(s));
    }
    summary.overall.stratum = "aggregate";
    summary.overall.cell = overall.total > 0 ? make_cell(overall.correct, overall.total) : AccuracyCell{};
    summary.overall.errors = overall.errors;
    summary.overall.transport_failures = overall.transport;
    return summary;
}

namespace {

std::vector<const StratumSummary*> all_rows(const RunSummary& summary) {
    std::vector<const StratumSummary*> rows;
    for (const auto& s : summary.strata) rows.push_back(&s);
    rows.push_back(&summary.overall);
    return rows;
}

}  // namespace

std::string render_table(const RunSummary& summary) {
    const auto rows = all_rows(summary);
    std::size_t key_width = 8;
    for (const auto* row : rows) key_width = std::max(key_width, row->stratum.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(key_width + 2)) << "stratum"
        << std::setw(22) << "accuracy"
        << std::setw(6) << "FP" << std::setw(6) << "FN" << std::setw(8) << "indet"
        << "transport\n";
    for (const auto* row : rows) {
        out << std::left << std::setw(static_cast<int>(key_width + 2)) << row->stratum
            << std::setw(22) << format_cell(row->cell) << std::setw(6) << row->errors.false_positive
            << std::setw(6) << row->errors.false_negative << std::setw(8) << row->errors.indeterminate
            << row->transport_failures << "\n";
    }
    return out.str();
}

std::string render_csv(const RunSummary& summary) {
    std::ostringstream out;
    out << "stratum,correct,total,ci_half_width_pts,false_positive,false_negative,indeterminate,"
           "transport_failures\n";
    for (const auto* row : all_rows(summary)) {
        out << '"' << row->stratum << '"' << ',' << row->cell.correct << ',' << row->cell.total << ','
            << std::setprecision(10) << row->cell.ci_half_width_pts << ','
            << row->errors.false_positive << ',' << row->errors.false_negative << ','
            << row->errors.indeterminate << ',' << row->transport_failures << "\n";
    }
    return out.str();
}

json summary_to_json(const RunSummary& summary) {
    json j;
    j["metadata"] = summary.metadata;
    auto row_json = [](const StratumSummary& s) {
        return json{{"stratum", s.stratum},
                    {"correct", s.cell.correct},
                    {"total", s.cell.total},
                    {"ci_half_width_pts", s.cell.ci_half_width_pts},
                    {"cell", format_cell(s.cell)},
                    {"false_positive", s.errors.false_positive},
                    {"false_negative", s.errors.false_negative},
                    {"indeterminate", s.errors.indeterminate},
                    {"transport_failures", s.transport_failures}};
    };
    j["strata"] = json::array();
    for (const auto& s : summary.strata) j["strata"].push_back(row_json(s));
    j["aggregate"] = row_json(summary.overall);
    return j;
}

}  // namespace statbench
