#include "softsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "softsense/csv.hpp"
#include "softsense/errors.hpp"

namespace softsense {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> y_hat,
                   std::size_t min_len, const char* op) {
    if (y.size() != y_hat.size()) {
        throw ShapeError(std::string(op) + ": length mismatch (" + std::to_string(y.size()) +
                         " vs " + std::to_string(y_hat.size()) + ")");
    }
    if (y.size() < min_len) {
        throw std::runtime_error(std::string(op) + ": need at least " + std::to_string(min_len) +
                                 " samples, got " + std::to_string(y.size()));
    }
}

double range_of(std::span<const double> y, const char* op) {
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double range = *hi - *lo;
    if (range <= 0.0) {
        throw std::runtime_error(std::string(op) + ": ground truth is constant (y_max == y_min)");
    }
    return range;
}

}  // namespace

double nrmse(std::span<const double> y, std::span<const double> y_hat) {
    check_lengths(y, y_hat, 2, "nrmse");
    const double range = range_of(y, "nrmse");
    double ss = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double r = y[t] - y_hat[t];
        ss += r * r;
    }
    return std::sqrt(ss / static_cast<double>(y.size())) / range;
}

double r2(std::span<const double> y, std::span<const double> y_hat) {
    check_lengths(y, y_hat, 2, "r2");
    double mean = 0.0;
    for (const double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        ss_res += (y[t] - y_hat[t]) * (y[t] - y_hat[t]);
        ss_tot += (y[t] - mean) * (y[t] - mean);
    }
    if (ss_tot <= 0.0) throw std::runtime_error("r2: ground truth is constant");
    return 1.0 - ss_res / ss_tot;
}

double nmae(std::span<const double> y, std::span<const double> y_hat) {
    check_lengths(y, y_hat, 2, "nmae");
    const double range = range_of(y, "nmae");
    double sa = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) sa += std::abs(y[t] - y_hat[t]);
    return sa / static_cast<double>(y.size()) / range;
}

MapeResult mape(std::span<const double> y, std::span<const double> y_hat, double eps) {
    check_lengths(y, y_hat, 1, "mape");
    MapeResult res;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (std::abs(y[t]) <= eps) {
            ++res.excluded;
            continue;
        }
        sum += std::abs((y[t] - y_hat[t]) / y[t]);
        ++used;
    }
    if (used == 0) throw std::runtime_error("mape: all samples excluded (|y| <= eps)");
    res.value_pct = 100.0 * sum / static_cast<double>(used);
    return res;
}

MetricsReport make_report(std::span<const double> y, std::span<const double> y_hat) {
    MetricsReport r;
    r.nrmse = 100.0 * nrmse(y, y_hat);
    r.r2 = r2(y, y_hat);
    r.nmae = 100.0 * nmae(y, y_hat);
    const MapeResult m = mape(y, y_hat);
    r.mape = m.value_pct;
    r.mape_excluded = m.excluded;
    r.n_samples = y.size();
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    r.y_min = *lo;
    r.y_max = *hi;
    double mean = 0.0;
    for (const double v : y) mean += v;
    r.y_mean = mean / static_cast<double>(y.size());
    return r;
}

std::string report_to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["nrmse"] = r.nrmse;
    j["r2"] = r.r2;
    j["nmae"] = r.nmae;
    j["mape"] = r.mape;
    j["n_samples"] = r.n_samples;
    j["mape_excluded"] = r.mape_excluded;
    j["y_min"] = r.y_min;
    j["y_max"] = r.y_max;
    j["y_mean"] = r.y_mean;
    j["units"] = {{"nrmse", "percent"}, {"nmae", "percent"}, {"mape", "percent"}, {"r2", "unitless"}};
    return j.dump(2);
}

std::string report_csv_header() {
    return "target,model,nrmse,r2,nmae,mape,n_samples,mape_excluded,y_min,y_max,y_mean";
}

std::string report_csv_row(const std::string& target_tag, const std::string& model,
                           const MetricsReport& r) {
    std::string row = target_tag + "," + model;
    for (const double v : {r.nrmse, r.r2, r.nmae, r.mape}) row += "," + format_double(v);
    row += "," + std::to_string(r.n_samples) + "," + std::to_string(r.mape_excluded);
    for (const double v : {r.y_min, r.y_max, r.y_mean}) row += "," + format_double(v);
    return row;
}

}  // namespace softsense
