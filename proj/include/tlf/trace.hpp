#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tlf {

enum class MdusBranch { accepted_v, fell_back_xF, not_applicable };
enum class BusBranch { accepted_z, fell_back_xG, not_applicable };

std::string to_string(MdusBranch b);
std::string to_string(BusBranch b);
MdusBranch parse_mdus_branch(const std::string& s);
BusBranch parse_bus_branch(const std::string& s);

// One iteration x^k -> x^{k+1}. `F` is the objective at x^{k+1}.
struct TraceRecord {
    int k = 0;
    double F = 0.0;
    double rel_err = 0.0;
    double norm_xF_x = 0.0;
    double norm_xG_x = 0.0;
    double norm_xGmu_x = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
    MdusBranch mdus_branch = MdusBranch::not_applicable;
    BusBranch bus_branch = BusBranch::not_applicable;
    std::optional<double> psnr;
};

struct IterateTrace {
    std::string method;
    double initial_F = 0.0;
    // Set by solvers that run the sufficient-descent check: 1/(2t) - L/2.
    double sigma = 0.0;
    bool converged = false;
    std::vector<TraceRecord> records;

    bool empty() const noexcept { return records.empty(); }
    const TraceRecord& back() const { return records.back(); }
    // F before iteration k (initial_F for k = 0).
    double F_before(std::size_t k) const { return k == 0 ? initial_F : records[k - 1].F; }
};

}  // namespace tlf
