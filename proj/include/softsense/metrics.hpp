#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace softsense {

// Root mean squared error divided by the ground-truth range. Returned as a
// fraction; reports scale it by 100.
double nrmse(std::span<const double> y, std::span<const double> y_hat);

// 1 - SS_res / SS_tot
double r2(std::span<const double> y, std::span<const double> y_hat);

// Mean absolute error divided by the ground-truth range, as a fraction.
double nmae(std::span<const double> y, std::span<const double> y_hat);

struct MapeResult {
    double value_pct = 0.0;
    std::size_t excluded = 0;  // samples with |y| <= eps, left out of the mean
};

// Mean absolute percentage error, in percent. Samples whose ground truth is
// within eps of zero are excluded and counted rather than epsilon-inflated.
MapeResult mape(std::span<const double> y, std::span<const double> y_hat, double eps = 1e-8);

// nrmse and nmae carried x100 to match percent-style reporting; mape already
// in percent; r2 unscaled.
struct MetricsReport {
    double nrmse = 0.0;
    double r2 = 0.0;
    double nmae = 0.0;
    double mape = 0.0;
    std::size_t n_samples = 0;
    std::size_t mape_excluded = 0;
    double y_min = 0.0;
    double y_max = 0.0;
    double y_mean = 0.0;
};

MetricsReport make_report(std::span<const double> y, std::span<const double> y_hat);

std::string report_to_json(const MetricsReport& r);
std::string report_csv_header();
std::string report_csv_row(const std::string& target_tag, const std::string& model,
                           const MetricsReport& r);

}  // namespace softsense
