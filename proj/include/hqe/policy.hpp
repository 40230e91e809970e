#pragma once

namespace hqe {

/// Truncation caps. Every operation computes exactly modulo the windows
/// declared here; out-of-window products are discarded and recorded in the
/// per-series validity bounds.
struct Policy {
    int genus_cap = 1;    ///< max genus g; eps powers live in [-2 - eps_pad, 2*genus_cap - 2 + eps_pad]
    int jet_cap = 3;      ///< max descendant level k in q_{k,a}
    int y_cap = 3;        ///< max total y-degree
    int novikov_cap = 2;  ///< max power of s
    int lambda_lo = 6;    ///< lambda window [-lambda_lo, lambda_hi]
    int lambda_hi = 8;
    int z_lo = 5;         ///< z window [-z_lo, z_hi]
    int z_hi = 5;
    int dx_cap = 4;       ///< max D_x degree
    int log_cap = 2;      ///< max degree in L = log(lambda/sqrt(Q))
    int q_deg_cap = 5;    ///< max total degree in Fock q/x variables
    int t_cap = 3;        ///< max degree in t
    int x_cap = 6;        ///< max degree in the Toda spatial variable x

    int eps_pad = 10;     ///< internal eps window padding (negative side)
    int w_pad = 6;        ///< internal chart/lambda window padding

    int eps_lo() const { return -2 - eps_pad; }
    int eps_hi() const { return 2 * genus_cap - 2 + eps_pad; }
};

} // namespace hqe
