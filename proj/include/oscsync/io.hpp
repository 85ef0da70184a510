#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscsync/analysis.hpp"
#include "oscsync/simulator.hpp"

namespace oscsync {

inline std::vector<std::string> axis_labels(int m) {
    if (m == 2) return {"x", "y"};
    std::vector<std::string> labels;
    for (int c = 1; c <= m; ++c) labels.push_back(std::to_string(c));
    return labels;
}

/// Column layout: t, leader q/qdot, then per follower q, qdot, a_hat, s,
/// tau, V. Values are written with 17 significant digits so a re-parse
/// recovers them exactly.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    if (traj.samples.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
    const auto axes = axis_labels(traj.m);
    out << "t";
    for (const auto& a : axes) out << ",q0_" << a;
    for (const auto& a : axes) out << ",q0dot_" << a;
    for (int i = 1; i <= traj.n; ++i) {
        const std::string id = std::to_string(i);
        for (const auto& a : axes) out << ",q" << id << "_" << a;
        for (const auto& a : axes) out << ",q" << id << "dot_" << a;
        const std::size_t p = traj.samples.front().followers[i - 1].a_hat.size();
        for (std::size_t k = 1; k <= p; ++k) out << ",ahat" << id << "_" << k;
        for (const auto& a : axes) out << ",s" << id << "_" << a;
        for (const auto& a : axes) out << ",tau" << id << "_" << a;
        out << ",V" << id;
    }
    out << "\n";
    for (const TrajectorySample& sample : traj.samples) {
        out << format_full(sample.t);
        auto emit = [&out](const Vec& v) {
            for (double x : v) out << ',' << format_full(x);
        };
        emit(sample.leader.q);
        emit(sample.leader.qdot);
        for (const FollowerSample& f : sample.followers) {
            emit(f.q);
            emit(f.qdot);
            emit(f.a_hat);
            emit(f.s);
            emit(f.tau);
            out << ',' << format_full(f.lyapunov);
        }
        out << "\n";
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<Vec> rows;
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty input");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Vec row;
        std::stringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.header.size())
            throw std::runtime_error("read_csv: row width does not match header");
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Error time series of a report as CSV: t, e_q, e_v.
inline void write_sync_report_csv(const SyncReport& rep, std::ostream& out) {
    out << "t,e_q,e_v\n";
    for (std::size_t k = 0; k < rep.t.size(); ++k)
        out << format_full(rep.t[k]) << ',' << format_full(rep.e_q[k]) << ','
            << format_full(rep.e_v[k]) << "\n";
}

inline std::string sync_report_text(const SyncReport& rep,
                                    const std::vector<std::string>& warnings = {}) {
    std::ostringstream os;
    os << "synchronization report\n";
    os << "  samples:                " << rep.t.size() << "\n";
    os << "  time span:              [" << rep.t.front() << ", " << rep.t.back() << "] s\n";
    os << "  threshold:              " << rep.threshold << "\n";
    if (rep.converged)
        os << "  converged:              yes, from t = " << rep.convergence_time << " s\n";
    else
        os << "  converged:              no\n";
    os << "  final position error:   " << rep.final_e_q << "\n";
    os << "  final velocity error:   " << rep.final_e_v << "\n";
    os << "  lyapunov violations:    " << rep.lyapunov.count << "\n";
    os << "  max lyapunov increase:  " << rep.lyapunov.max_increase << "\n";
    for (const std::string& w : warnings) os << "  warning: " << w << "\n";
    return os.str();
}

}  // namespace oscsync
