use num_integer::binomial;

/// Worst-case number of CRT solves made by [`super::reconstruct`] when no
/// residue set is deficient.
///
/// Round `l` sees `ρ_l = ρ − l + 1` remaining vectors. Splitting the `γ`
/// sets as evenly as possible among them (`γ = η_l·ρ_l + α_l`) minimises
/// the number of size-`η` subsets whose residues all come from a single
/// vector; every other subset may be tried first.
pub fn crt_invocation_bound(gamma: usize, rho: usize) -> u128 {
    assert!(rho >= 1 && gamma >= rho, "need gamma >= rho >= 1");
    let c = |n: usize, k: usize| -> u128 { if n < k { 0 } else { binomial(n as u128, k as u128) } };
    let eta = gamma / rho;
    let total = c(gamma, eta);
    (1..=rho)
        .map(|l| {
            let remaining = rho - l + 1;
            let eta_l = gamma / remaining;
            let alpha_l = gamma % remaining;
            let good = alpha_l as u128 * c(eta_l + 1, eta) + (remaining - alpha_l) as u128 * c(eta_l, eta);
            total - good + 1
        })
        .sum()
}
