#pragma once

#include <string>

namespace faceattr::audit {

struct WorkloadInputs {
    double n_images = 202599;
    double n_features = 40;
    double n_workers = 50;
    double days = 90;
    double hours_per_day = 8;
    double redundancy = 1;
};

struct WorkloadEstimate {
    WorkloadInputs inputs;
    double images_per_worker_hour = 0.0;
    double decisions_per_worker_minute = 0.0;
    double total_decisions = 0.0;  ///< n_images * n_features * redundancy
};

/// Throws ArgumentError unless every input is positive and finite.
WorkloadEstimate workload_estimate(const WorkloadInputs& inputs);

/// Decisions per minute for a worker labelling `images_per_hour` images with
/// `n_features` attributes each.
double decisions_per_minute(double images_per_hour, double n_features);

/// Human-readable summary.
std::string format_workload(const WorkloadEstimate& estimate);
std::string format_rate(double images_per_hour, double n_features);

} // namespace faceattr::audit
