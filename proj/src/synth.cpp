#include "softsense/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "softsense/csv.hpp"
#include "softsense/errors.hpp"
#include "softsense/rng.hpp"

namespace softsense {

void SynthSpec::validate() const {
    if (n_sensors < 2) throw ConfigError("gen-synth: need at least 2 sensors");
    if (length < 10) throw ConfigError("gen-synth: need at least 10 timesteps");
    if (drivers.empty()) throw ConfigError("gen-synth: need at least one driver sensor");
    for (const auto d : drivers) {
        if (d < 1 || d > n_sensors) {
            throw ConfigError("gen-synth: driver " + std::to_string(d) +
                              " out of range 1.." + std::to_string(n_sensors));
        }
    }
    if (lag >= length / 2) throw ConfigError("gen-synth: lag too large for the series length");
    if (noise < 0.0) throw ConfigError("gen-synth: noise must be >= 0");
    if (kind != "linear" && kind != "nonlinear") {
        throw ConfigError("gen-synth: kind must be 'linear' or 'nonlinear'");
    }
}

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Smooth band-limited series: a few sinusoids plus AR(1) roughness.
Vec smooth_series(std::size_t length, Rng& rng) {
    struct Tone {
        double amp, freq, phase;
    };
    std::vector<Tone> tones(3);
    for (auto& t : tones) {
        t.amp = 0.4 + 0.8 * rng.uniform();
        t.freq = 0.004 + 0.05 * rng.uniform();
        t.phase = kTwoPi * rng.uniform();
    }
    Vec out(length, 0.0);
    double ar = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
        double v = 0.0;
        for (const auto& tone : tones) v += tone.amp * std::sin(kTwoPi * tone.freq * t + tone.phase);
        ar = 0.9 * ar + 0.1 * rng.normal();
        out[t] = v + 0.3 * ar;
    }
    return out;
}

}  // namespace

SynthResult generate_synth(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_sensors;
    const std::size_t t_len = spec.length;

    Rng rng(mix_seed(spec.seed, 0x5E9));
    const Vec shared = smooth_series(t_len, rng);

    std::vector<bool> is_driver(n + 1, false);
    for (const auto d : spec.drivers) is_driver[d] = true;

    // Drivers mix a small shared latent into a dominant private component,
    // so they correlate with each other yet both stay necessary for the
    // target. The remaining sensors are weak independent nuisance series.
    std::vector<Vec> sensors(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec private_part = smooth_series(t_len, rng);
        sensors[i].resize(t_len);
        if (is_driver[i + 1]) {
            for (std::size_t t = 0; t < t_len; ++t) {
                sensors[i][t] = 0.6 * shared[t] + 0.85 * private_part[t];
            }
        } else {
            for (std::size_t t = 0; t < t_len; ++t) sensors[i][t] = 0.3 * private_part[t];
        }
    }

    // Positive coefficients only: softmax attention mixes projections with
    // nonnegative weights and the normalized inputs are nonnegative, so
    // mixed- or negative-sign driver sums sit in a regime the attention
    // mixture cannot reach without dead ReLU units.
    Vec coeffs(spec.drivers.size(), 0.0);
    for (auto& c : coeffs) c = 0.8 + 0.4 * rng.uniform();

    // Offset keeps the target away from zero so percentage errors are defined.
    const double offset = 5.0;
    Vec target(t_len, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
        const std::size_t src = t >= spec.lag ? t - spec.lag : 0;
        double v = offset;
        for (std::size_t di = 0; di < spec.drivers.size(); ++di) {
            v += coeffs[di] * sensors[spec.drivers[di] - 1][src];
        }
        if (spec.kind == "nonlinear" && spec.drivers.size() >= 2) {
            v += 0.6 * sensors[spec.drivers[0] - 1][src] * sensors[spec.drivers[1] - 1][src];
        }
        if (spec.noise > 0.0) v += spec.noise * rng.normal();
        target[t] = v;
    }

    SynthResult result;
    result.ds.values = Matrix(t_len, n + 1);
    result.ds.variable_meta.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        result.ds.variable_meta.push_back(
            {static_cast<int>(i + 1), "S" + std::to_string(i + 1),
             is_driver[i + 1] ? "driver sensor" : "nuisance sensor", ""});
        for (std::size_t t = 0; t < t_len; ++t) result.ds.values(t, i) = sensors[i][t];
    }
    result.ds.variable_meta.push_back({static_cast<int>(n + 1), "Y", "synthetic target", ""});
    for (std::size_t t = 0; t < t_len; ++t) result.ds.values(t, n) = target[t];

    nlohmann::json truth;
    truth["drivers"] = spec.drivers;
    truth["driver_tags"] = [&] {
        std::vector<std::string> tags;
        for (const auto d : spec.drivers) tags.push_back("S" + std::to_string(d));
        return tags;
    }();
    truth["lag"] = spec.lag;
    truth["noise"] = spec.noise;
    truth["kind"] = spec.kind;
    truth["coefficients"] = coeffs;
    truth["offset"] = offset;
    truth["target_tag"] = "Y";
    truth["seed"] = spec.seed;
    result.truth_json = truth.dump(2);
    return result;
}

void write_synth(const SynthResult& result, const std::string& csv_path) {
    write_csv(csv_path, result.ds.tags(), result.ds.values);
    std::filesystem::path truth_path(csv_path);
    truth_path.replace_extension();
    const std::string truth_file = truth_path.string() + "_truth.json";
    std::ofstream out(truth_file);
    if (!out) throw IoError("cannot write file: " + truth_file);
    out << result.truth_json << '\n';
}

}  // namespace softsense
