#pragma once

#include <cstdint>

#include "memprot/model.hpp"

namespace memprot {

struct trial_config {
    redundancy_scheme scheme = replication{3};
    block_failure_rates rates;  // sampled in plain double; meant for p >= ~1e-4
    uint64_t trials = 1;
    uint64_t seed = 0;
    unsigned workers = 1;
};

struct estimate {
    double mean = 0.0;
    double ci95 = 0.0;
};

// DUE and NDE here follow the read protocol, not the published union-style
// sums: p_lb_nde estimates the probability that the block actually served
// carried a silent error. The exact enumerator reports both semantics.
struct trial_report {
    estimate p_lb_due;
    estimate p_lb_nde;
    // reads performed minus reads a clean pass needs (1 or K), minus nothing
    // on failure; and the same conditioned on success. NaN when no trial
    // succeeded.
    estimate extra_reads_unconditional;
    estimate extra_reads_given_success;
    uint64_t trials = 0;
    uint64_t seed = 0;
};

trial_report simulate_replication(const trial_config& cfg);
trial_report simulate_ec(const trial_config& cfg);
trial_report simulate(const trial_config& cfg);

// Closed-form expectations under the same stopping rule the sampler
// implements, in plain double. p_nde is served-block semantics, not the
// union-style published sum; the extra-read moments count reads beyond a
// clean pass (failures pay the full n). NaN conditional mean when success is
// impossible.
struct protocol_expectations {
    double p_due = 0.0;
    double p_nde = 0.0;
    double extra_reads_unconditional = 0.0;
    double extra_reads_given_success = 0.0;
};

protocol_expectations protocol_values(const redundancy_scheme& scheme, double p, double q);

}  // namespace memprot
