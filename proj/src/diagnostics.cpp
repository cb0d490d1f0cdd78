#include "msibim/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace msibim {

void TimeSeries::append(const SeriesRecord& r) {
    if (!records.empty() && !(r.t > records.back().t))
        throw SimError("time series must be strictly increasing in t");
    records.push_back(r);
}

void TimeSeries::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open series file for writing: " + path);
    out << "t,volume,area,components,pieces,v_min,v_max,residual\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g\n", r.t,
                      r.volume, r.area, r.components, r.pieces, r.v_min, r.v_max,
                      r.residual);
        out << buf;
    }
}

double measure_volume(const ScalarField& d) {
    const Grid& g = d.grid;
    const double w = 1.5 * g.h;
    const double hm = g.dim == 3 ? g.h * g.h * g.h : g.h * g.h;
    double acc = 0.0;  // ordered reduction: keep the raster order
    for (double v : d.values) {
        double hv;
        if (v > w)
            hv = 1.0;
        else if (v < -w)
            hv = 0.0;
        else
            hv = 0.5 * (1.0 + v / w + std::sin(M_PI * v / w) / M_PI);
        acc += hv;
    }
    return acc * hm;
}

double measure_area(const DistanceBundle& bundle) {
    double acc = 0.0;
    for (std::size_t p = 0; p < bundle.size(); ++p)
        if (bundle.usable[p]) acc += bundle.weight[p];
    return acc;
}

MergingReport merging_report(const TimeSeries& series) {
    MergingReport rep;
    if (series.records.empty()) {
        rep.note = "no records";
        return rep;
    }
    rep.initial_area = series.records.front().volume;
    for (std::size_t i = 1; i < series.records.size(); ++i) {
        const auto& prev = series.records[i - 1];
        const auto& cur = series.records[i];
        if (cur.pieces < prev.pieces) {
            MergeEvent ev;
            ev.t_start = prev.t;
            ev.t_end = cur.t;
            ev.start_area = prev.volume;
            ev.end_area = cur.volume;
            ev.area_jump = std::abs(cur.volume - prev.volume);
            ev.relative_area_error =
                rep.initial_area != 0.0 ? ev.area_jump / rep.initial_area : 0.0;
            rep.events.push_back(ev);
        }
    }
    if (rep.events.empty()) rep.note = "no merge event detected";
    return rep;
}

std::string MergingReport::ascii_table() const {
    std::ostringstream out;
    char buf[256];
    if (events.empty()) {
        out << "(" << note << ")\n";
        return out.str();
    }
    out << "Initial Area        " << initial_area << "\n";
    for (const auto& ev : events) {
        std::snprintf(buf, sizeof buf,
                      "Start Merge Area    %.6f\nEnd Merge Area      %.6f\n"
                      "Area Jump           %.6f\nRelative Area Error %.5f\n",
                      ev.start_area, ev.end_area, ev.area_jump,
                      ev.relative_area_error);
        out << buf;
    }
    return out.str();
}

void MergingReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open merge report for writing: " + path);
    out << "initial_area,start_merge_area,end_merge_area,area_jump,relative_area_error\n";
    char buf[256];
    for (const auto& ev : events) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      initial_area, ev.start_area, ev.end_area, ev.area_jump,
                      ev.relative_area_error);
        out << buf;
    }
    if (events.empty()) out << "# " << note << "\n";
}

ConvergenceTable convergence_table(const std::vector<double>& h,
                                   const std::vector<double>& errors) {
    if (h.size() != errors.size() || h.size() < 2)
        throw std::invalid_argument("convergence_table: need matching h/error lists, >= 2 rows");
    ConvergenceTable t;
    t.h = h;
    t.error = errors;
    t.order.assign(h.size(), 0.0);
    for (std::size_t i = 1; i < h.size(); ++i) {
        double ratio = errors[i - 1] / errors[i];
        t.order[i] = std::log(ratio) / std::log(h[i - 1] / h[i]);
    }
    return t;
}

std::string ConvergenceTable::ascii_table() const {
    std::ostringstream out;
    char buf[128];
    out << "       h          error      order\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i == 0)
            std::snprintf(buf, sizeof buf, "%10.6f  %12.5e      -\n", h[i], error[i]);
        else
            std::snprintf(buf, sizeof buf, "%10.6f  %12.5e  %6.2f\n", h[i], error[i],
                          order[i]);
        out << buf;
    }
    return out.str();
}

void ConvergenceTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open table for writing: " + path);
    out << "h,error,order\n";
    char buf[128];
    for (std::size_t i = 0; i < h.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", h[i], error[i],
                      order[i]);
        out << buf;
    }
}

}  // namespace msibim
