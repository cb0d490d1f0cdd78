#pragma once

#include <string>
#include <vector>

#include "msibim/levelset.hpp"

namespace msibim {

// One diagnostics record per accepted time step.
struct SeriesRecord {
    double t = 0.0;
    double volume = 0.0;   // area in 2D (solid phase)
    double area = 0.0;     // perimeter in 2D (interface measure)
    int components = 0;
    int pieces = 0;
    double v_min = 0.0;
    double v_max = 0.0;
    double residual = 0.0;
};

struct TimeSeries {
    std::vector<SeriesRecord> records;

    void append(const SeriesRecord& r);
    void write_csv(const std::string& path) const;
};

// Smoothed-Heaviside volume of the solid phase (width 1.5h) and the tube
// quadrature of the interface measure.
double measure_volume(const ScalarField& d);
double measure_area(const DistanceBundle& bundle);

// Table 1-style merge bookkeeping: a merge event is a drop in the interface
// piece count between consecutive records.
struct MergeEvent {
    double t_start = 0.0, t_end = 0.0;
    double start_area = 0.0;  // solid volume just before the merge
    double end_area = 0.0;    // solid volume just after
    double area_jump = 0.0;
    double relative_area_error = 0.0;  // jump / initial volume
};

struct MergingReport {
    double initial_area = 0.0;
    std::vector<MergeEvent> events;
    std::string note;  // set when no merge occurred

    std::string ascii_table() const;
    void write_csv(const std::string& path) const;
};

MergingReport merging_report(const TimeSeries& series);

// Observed convergence orders from errors at successive resolutions.
struct ConvergenceTable {
    std::vector<double> h;
    std::vector<double> error;
    std::vector<double> order;  // order[0] unset; log ratios otherwise

    std::string ascii_table() const;
    void write_csv(const std::string& path) const;
};

ConvergenceTable convergence_table(const std::vector<double>& h,
                                   const std::vector<double>& errors);

}  // namespace msibim
