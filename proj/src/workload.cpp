#include "faceattr/workload.hpp"

#include <cmath>
#include <cstdio>

#include "faceattr/error.hpp"

namespace faceattr::audit {

namespace {

void require_positive(double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) throw ArgumentError(std::string("workload: ") + name + " must be positive");
}

std::string line(const char* label, double v, int digits) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: %.*f\n", label, digits, v);
    return buf;
}

} // namespace

WorkloadEstimate workload_estimate(const WorkloadInputs& in) {
    require_positive(in.n_images, "n_images");
    require_positive(in.n_features, "n_features");
    require_positive(in.n_workers, "n_workers");
    require_positive(in.days, "days");
    require_positive(in.hours_per_day, "hours_per_day");
    require_positive(in.redundancy, "redundancy");
    WorkloadEstimate e;
    e.inputs = in;
    e.images_per_worker_hour = in.n_images * in.redundancy / (in.n_workers * in.days * in.hours_per_day);
    e.decisions_per_worker_minute = decisions_per_minute(e.images_per_worker_hour, in.n_features);
    e.total_decisions = in.n_images * in.n_features * in.redundancy;
    return e;
}

double decisions_per_minute(double images_per_hour, double n_features) {
    require_positive(images_per_hour, "images_per_hour");
    require_positive(n_features, "n_features");
    return images_per_hour * n_features / 60.0;
}

std::string format_workload(const WorkloadEstimate& e) {
    std::string out = "mode: schedule\n";
    out += line("images", e.inputs.n_images, 0);
    out += line("features", e.inputs.n_features, 0);
    out += line("workers", e.inputs.n_workers, 0);
    out += line("days", e.inputs.days, 2);
    out += line("hours_per_day", e.inputs.hours_per_day, 2);
    out += line("redundancy", e.inputs.redundancy, 2);
    out += line("total_decisions", e.total_decisions, 0);
    out += line("images_per_worker_hour", e.images_per_worker_hour, 2);
    out += line("decisions_per_worker_minute", e.decisions_per_worker_minute, 2);
    return out;
}

std::string format_rate(double images_per_hour, double n_features) {
    const double d = decisions_per_minute(images_per_hour, n_features);
    std::string out = "mode: rate\n";
    out += line("images_per_worker_hour", images_per_hour, 2);
    out += line("features", n_features, 0);
    out += line("decisions_per_worker_minute", d, 2);
    char buf[96];
    std::snprintf(buf, sizeof buf, "summary: about %.1f decisions/min per worker\n", d);
    out += buf;
    return out;
}

} // namespace faceattr::audit
