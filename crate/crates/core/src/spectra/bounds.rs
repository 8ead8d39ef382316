use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qsim::ComplexMatrix;

use super::eigen::{hermitian_eigen, hermitian_eigenvalues, lambda_max};
use super::encoding::MessageEncodingVector;
use super::sigma::{build_sigma, build_sigma_star, guess_bound, lambda_max_bound};

/// Largest `N` for which `I_alpha` is computed by full enumeration of the
/// `4^{|E|}` encodings.
pub const I_ALPHA_MAX_N: usize = 4;
/// Largest `N` for which `lambda_max(sigma_star)` is diagonalized rather
/// than taken from the closed form.
pub const STAR_NUMERIC_MAX_N: usize = 10;
/// Slack on every numeric inequality of the chain.
pub const CHAIN_SLACK: f64 = 1e-9;

const ENUMERATION_CHUNKS: u64 = 64;

pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// `16 |E|`, which keeps `4^{|E|/alpha}` at or below `4^{1/16}`.
pub fn default_alpha(n: usize) -> f64 {
    16.0 * pair_count(n) as f64
}

/// Every quantity of the numeric guessing-probability chain. Quantities
/// raised to `1/alpha` are reported in that form so they stay finite.
#[derive(Clone, Debug, PartialEq)]
pub struct IAlphaEvaluation {
    pub n: usize,
    pub alpha: f64,
    /// `I_alpha(N) = Tr[A^{1/alpha}] / (|E| 2^N)`.
    pub value: f64,
    /// `Tr[A^{1/alpha}]` with `A = Σ_m sigma_m^alpha`.
    pub trace_root: f64,
    /// `lambda_max(A)^{1/alpha}`.
    pub lambda_max_a_root: f64,
    /// `(Σ_m lambda_max(sigma_m)^alpha)^{1/alpha}`.
    pub weyl_sum_root: f64,
    /// `max_m lambda_max(sigma_m)`.
    pub lambda_max_mstar: f64,
}

/// Exact `I_alpha(N)` by summing `sigma_m^alpha` over all `4^{|E|}`
/// encodings.
pub fn i_alpha(n: usize, alpha: f64) -> Result<IAlphaEvaluation> {
    if n < 2 {
        return Err(Error::Validation(format!("I_alpha needs N >= 2, got {n}")));
    }
    if n > I_ALPHA_MAX_N {
        return Err(Error::Capacity { what: "I_alpha enumeration", requested: n, cap: I_ALPHA_MAX_N });
    }
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::Validation(format!("alpha must be a finite real > 1, got {alpha}")));
    }
    let e = pair_count(n);
    let total = 1u64 << (2 * e);
    let dim = 1usize << n;
    // Spectra are divided by the analytic ceiling so that every
    // (lambda / scale)^alpha stays in [0, 1].
    let scale = lambda_max_bound(n);

    let chunk = total.div_ceil(ENUMERATION_CHUNKS).max(1);
    let ranges: Vec<(u64, u64)> =
        (0..total).step_by(chunk as usize).map(|start| (start, (start + chunk).min(total))).collect();
    // Each chunk is summed sequentially and chunk results are merged in
    // index order, so the floating-point result is independent of thread
    // scheduling.
    let partials: Vec<Result<(ComplexMatrix, f64, f64)>> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            let mut weyl = 0.0;
            let mut lmax = 0.0f64;
            for idx in lo..hi {
                let m = MessageEncodingVector::from_index(n, idx)?;
                let sigma = build_sigma(&m)?;
                let eig = hermitian_eigen(sigma.matrix())?;
                let top = *eig.values.last().expect("non-empty");
                lmax = lmax.max(top);
                weyl += (top.max(0.0) / scale).powf(alpha);
                acc.add_assign(&eig.map_spectrum(|x| (x.max(0.0) / scale).powf(alpha)));
            }
            Ok((acc, weyl, lmax))
        })
        .collect();
    let mut a = ComplexMatrix::zeros(dim, dim);
    let mut weyl = 0.0;
    let mut lmax_mstar = 0.0f64;
    for p in partials {
        let (acc, w, l) = p?;
        a.add_assign(&acc);
        weyl += w;
        lmax_mstar = lmax_mstar.max(l);
    }
    let spectrum = hermitian_eigenvalues(&a)?;
    let inv = 1.0 / alpha;
    let trace_root = scale * spectrum.iter().map(|x| x.max(0.0).powf(inv)).sum::<f64>();
    let lambda_max_a_root = scale * spectrum.last().expect("non-empty").max(0.0).powf(inv);
    let weyl_sum_root = scale * weyl.powf(inv);
    Ok(IAlphaEvaluation {
        n,
        alpha,
        value: trace_root / (e as f64 * dim as f64),
        trace_root,
        lambda_max_a_root,
        weyl_sum_root,
        lambda_max_mstar: lmax_mstar,
    })
}

/// One named inequality `lhs <= rhs` of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStep {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl ChainStep {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + CHAIN_SLACK
    }
}

/// Analytic and (where tractable) numeric quantities behind the
/// `1/2 + 1/N` guessing bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub alpha: f64,
    pub i_alpha_numeric: Option<f64>,
    /// `lambda_max(sigma_star(N))`, diagonalized up to
    /// [`STAR_NUMERIC_MAX_N`], closed form `N/2` beyond.
    pub lambda_max_sigma_star: f64,
    pub lambda_max_bound: f64,
    pub guess_bound: f64,
    /// `max_m lambda_max(sigma_m)` when enumerated.
    pub lambda_max_mstar: Option<f64>,
    /// `(1/2 + 1/N) 4^{|E|/alpha}`, where the chain ends.
    pub chain_bound: f64,
    pub steps: Vec<ChainStep>,
}

impl BoundReport {
    pub fn chain_holds(&self) -> bool {
        self.steps.iter().all(ChainStep::holds)
    }

    pub const CSV_HEADER: &'static str =
        "N,alpha,i_alpha,lmax_star,lmax_bound,guess_bound,lmax_mstar,chain_bound,chain_ok";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
        format!(
            "{},{},{},{:.12},{:.12},{:.12},{},{:.12},{}",
            self.n,
            self.alpha,
            opt(self.i_alpha_numeric),
            self.lambda_max_sigma_star,
            self.lambda_max_bound,
            self.guess_bound,
            opt(self.lambda_max_mstar),
            self.chain_bound,
            self.chain_holds()
        )
    }
}

pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from(BoundReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Builds the full chain for `N`. Numeric entries are filled in where the
/// enumeration caps allow; the analytic entries are always present.
pub fn bound_chain_report(n: usize, alpha: f64) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::Validation(format!("bound chain needs N >= 2, got {n}")));
    }
    let e = pair_count(n) as f64;
    let spread = 4f64.powf(e / alpha);
    let lmax_bound = lambda_max_bound(n);
    let gbound = guess_bound(n);
    let chain_bound = gbound * spread;
    let star = if n <= STAR_NUMERIC_MAX_N { lambda_max(build_sigma_star(n)?.matrix())? } else { n as f64 / 2.0 };
    let mut steps = vec![
        ChainStep { name: "lambda_max(sigma_star) <= N/2", lhs: star, rhs: n as f64 / 2.0 },
        ChainStep {
            name: "sum_{n=2..N} n/2 <= N^2/4 + N/4 - 1/2",
            lhs: (2..=n).map(|k| k as f64 / 2.0).sum(),
            rhs: lmax_bound,
        },
        ChainStep { name: "lambda bound / |E| <= 1/2 + 1/N", lhs: lmax_bound / e, rhs: gbound },
    ];
    let mut i_numeric = None;
    let mut mstar = None;
    if n <= I_ALPHA_MAX_N {
        let ev = i_alpha(n, alpha)?;
        let two_n = (1u64 << n) as f64;
        steps.extend([
            ChainStep {
                name: "Tr[A^(1/a)] <= 2^N lambda_max(A)^(1/a)",
                lhs: ev.trace_root,
                rhs: two_n * ev.lambda_max_a_root,
            },
            ChainStep {
                name: "lambda_max(A)^(1/a) <= (sum_m lambda_max(sigma_m)^a)^(1/a)",
                lhs: ev.lambda_max_a_root,
                rhs: ev.weyl_sum_root,
            },
            ChainStep {
                name: "(sum_m lambda_max(sigma_m)^a)^(1/a) <= 4^(|E|/a) lambda_max(sigma_m*)",
                lhs: ev.weyl_sum_root,
                rhs: spread * ev.lambda_max_mstar,
            },
            ChainStep {
                name: "I_a <= 4^(|E|/a) lambda_max(sigma_m*) / |E|",
                lhs: ev.value,
                rhs: spread * ev.lambda_max_mstar / e,
            },
            ChainStep { name: "lambda_max(sigma_m*) <= N^2/4 + N/4 - 1/2", lhs: ev.lambda_max_mstar, rhs: lmax_bound },
            ChainStep { name: "I_a <= (1/2 + 1/N) 4^(|E|/a)", lhs: ev.value, rhs: chain_bound },
        ]);
        i_numeric = Some(ev.value);
        mstar = Some(ev.lambda_max_mstar);
    }
    Ok(BoundReport {
        n,
        alpha,
        i_alpha_numeric: i_numeric,
        lambda_max_sigma_star: star,
        lambda_max_bound: lmax_bound,
        guess_bound: gbound,
        lambda_max_mstar: mstar,
        chain_bound,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_i_alpha_is_one() {
        // A is the sum of the four Bell projectors, i.e. the identity.
        let ev = i_alpha(2, 16.0).unwrap();
        assert!((ev.value - 1.0).abs() < 1e-12);
        assert!((ev.lambda_max_mstar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap_and_alpha_checks() {
        assert!(matches!(i_alpha(5, 200.0), Err(Error::Capacity { .. })));
        assert!(i_alpha(3, 1.0).is_err());
        assert!(i_alpha(3, f64::NAN).is_err());
    }

    #[test]
    fn analytic_rows() {
        let r = bound_chain_report(8, default_alpha(8)).unwrap();
        assert_eq!(r.lambda_max_bound, 17.5);
        assert!(r.i_alpha_numeric.is_none());
        assert!(r.chain_holds());
        let r4 = bound_chain_report(4, default_alpha(4)).unwrap();
        assert_eq!(r4.guess_bound, 0.75);
    }

    #[test]
    fn csv_has_documented_header() {
        let csv = reports_to_csv(&[bound_chain_report(2, 16.0).unwrap()]);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("N,alpha,i_alpha,lmax_star,lmax_bound,guess_bound"));
        assert!(lines.next().unwrap().starts_with("2,16,"));
    }
}
