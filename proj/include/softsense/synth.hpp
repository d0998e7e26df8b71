#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softsense/dataset.hpp"

namespace softsense {

// Desk-scale synthetic process: N input sensors plus one target column whose
// value is a lagged function of the named driver sensors plus noise. Driver
// sensors share a latent component, so the data carries correlation structure
// for discovery to find.
struct SynthSpec {
    std::size_t n_sensors = 6;             // input sensors; CSV gets n_sensors + 1 columns
    std::size_t length = 600;              // timesteps
    std::vector<std::size_t> drivers = {1, 2};  // 1-based sensor numbers
    std::size_t lag = 3;
    double noise = 0.01;                   // stddev of additive target noise
    std::string kind = "linear";           // "linear" or "nonlinear"
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthResult {
    ProcessDataset ds;      // columns S1..SN then Y
    std::string truth_json; // drivers, lag, coefficients, kind
};

SynthResult generate_synth(const SynthSpec& spec);

// Writes the CSV and a "<stem>_truth.json" file next to it.
void write_synth(const SynthResult& result, const std::string& csv_path);

}  // namespace softsense
