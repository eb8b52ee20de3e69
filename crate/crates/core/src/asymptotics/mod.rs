//! Expected data-point and cluster counts for negative binomial processes
//! over (three-parameter) beta processes, with Dirichlet and Pitman–Yor
//! comparators.
//!
//! Notation: r is the negative binomial shape, ξ(r) the expected number of
//! data points, Φ(r) the expected number of clusters (atoms with a nonzero
//! count) and Φ_j(r) the expected number of clusters of size exactly j.

mod growth;
mod urn;

pub use growth::{
    fit_growth_law, fit_line, power_law_prefactor, simulate_growth, summarize, GrowthAxis,
    GrowthConfig, GrowthLawFit, GrowthModel, GrowthPointSummary, GrowthRun, GrowthTriple,
};
pub use urn::{simulate_urn, UrnDraw};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, DEFAULT_REL_TOL};
use crate::special::{digamma, ln_gamma};

/// Cap on explicitly summed series terms; the closed-form tail is added to
/// whatever remains, so the cap affects speed only.
const MAX_SERIES_TERMS: u64 = 200_000;

/// An exact (or numerically exact) value together with its leading-order
/// asymptote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotic {
    pub exact: f64,
    pub asymptote: f64,
}

fn check_bnbp(r: f64, mass: f64, concentration: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("shape r must be positive, got {r}")));
    }
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(Error::param(format!("mass must be >= 0, got {mass}")));
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(Error::param(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    Ok(())
}

fn check_discount(discount: f64) -> Result<()> {
    if discount > 0.0 && discount < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "discount must lie in (0, 1), got {discount}"
        )))
    }
}

fn check_j(j: u64) -> Result<()> {
    if j == 0 {
        Err(Error::param("cluster size j must be >= 1"))
    } else {
        Ok(())
    }
}

/// ξ(r) = γθr/(θ - 1) for θ > 1; infinite otherwise.
pub fn xi_bnbp(r: f64, mass: f64, concentration: f64) -> Result<Asymptotic> {
    check_bnbp(r, mass, concentration)?;
    if concentration <= 1.0 {
        return Err(Error::Divergent(format!(
            "expected number of data points is infinite for concentration {concentration} <= 1"
        )));
    }
    let v = mass * concentration * r / (concentration - 1.0);
    Ok(Asymptotic {
        exact: v,
        asymptote: v,
    })
}

/// ξ(r) by its series over count values,
/// γθ·Γ(r+θ)/Γ(r)·Σ_{n≥1} Γ(n+r)/Γ(n+r+θ). The sum is accumulated until the
/// remaining tail, Γ(N+1+r)/((θ-1)Γ(N+r+θ)) after N terms (exact, by
/// telescoping), drops below `tol` relative to the partial sum; the tail is
/// then added.
pub fn xi_bnbp_series(r: f64, mass: f64, concentration: f64, tol: f64) -> Result<f64> {
    check_bnbp(r, mass, concentration)?;
    let t = concentration;
    if t <= 1.0 {
        return Err(Error::Divergent(format!(
            "expected number of data points is infinite for concentration {t} <= 1"
        )));
    }
    let ln_pref = ln_gamma(r + t) - ln_gamma(r);
    let mut partial = 0.0;
    let mut n = 1u64;
    let tail = |n: u64| {
        (ln_gamma(n as f64 + 1.0 + r) - ln_gamma(n as f64 + r + t) + ln_pref).exp() / (t - 1.0)
    };
    loop {
        partial += (ln_gamma(n as f64 + r) - ln_gamma(n as f64 + r + t) + ln_pref).exp();
        let rest = tail(n);
        if rest <= tol * partial || n >= MAX_SERIES_TERMS {
            return Ok(mass * t * (partial + rest));
        }
        n += 1;
    }
}

/// Φ(r) = γθ(ψ(θ + r) - ψ(θ)), which for integer r is γθ·Σ_{i<r} 1/(θ + i).
/// Asymptote γθ·ln r.
pub fn phi_bnbp(r: f64, mass: f64, concentration: f64) -> Result<Asymptotic> {
    check_bnbp(r, mass, concentration)?;
    let gt = mass * concentration;
    let exact = if r.fract() == 0.0 && r <= 1e7 {
        gt * (0..r as u64)
            .map(|i| 1.0 / (concentration + i as f64))
            .sum::<f64>()
    } else {
        gt * (digamma(concentration + r) - digamma(concentration))
    };
    Ok(Asymptotic {
        exact,
        asymptote: gt * r.ln(),
    })
}

/// Φ(r) as ∫(1 - (1 - b)^r) ν(db) by quadrature; α = 0 is the classic beta
/// process.
pub fn phi_quadrature(r: f64, mass: f64, concentration: f64, discount: f64) -> Result<f64> {
    check_bnbp(r, mass, concentration)?;
    let nu = crate::crm::LevyIntensity::Beta {
        mass,
        concentration,
        discount,
    };
    nu.validate()?;
    if mass == 0.0 {
        return Ok(0.0);
    }
    integrate(
        |b: f64| {
            let hit = -(r * (-b).ln_1p()).exp_m1();
            hit * nu.density(b)
        },
        0.0,
        1.0,
        DEFAULT_REL_TOL,
    )
}

/// Φ_j(r) = γθ·Γ(j+r)/(Γ(j+1)Γ(r))·Γ(j)Γ(r+θ)/Γ(j+r+θ); asymptote γθ/j.
pub fn phi_j_bnbp(j: u64, r: f64, mass: f64, concentration: f64) -> Result<Asymptotic> {
    check_bnbp(r, mass, concentration)?;
    check_j(j)?;
    let jf = j as f64;
    let t = concentration;
    let ln = ln_gamma(jf + r) - ln_gamma(jf + 1.0) - ln_gamma(r) + ln_gamma(jf) + ln_gamma(r + t)
        - ln_gamma(jf + r + t);
    Ok(Asymptotic {
        exact: mass * t * ln.exp(),
        asymptote: mass * t / jf,
    })
}

fn ln_3bp_constant(mass: f64, concentration: f64, discount: f64) -> f64 {
    mass.ln() + ln_gamma(1.0 + concentration)
        - ln_gamma(1.0 - discount)
        - ln_gamma(concentration + discount)
}

/// ξ(r) = γθr/(θ + α - 1) for θ > 1 - α.
pub fn xi_3bnbp(r: f64, mass: f64, concentration: f64, discount: f64) -> Result<Asymptotic> {
    check_discount(discount)?;
    if !(r > 0.0) || !(mass >= 0.0) {
        return Err(Error::param("need r > 0 and mass >= 0"));
    }
    if concentration + discount <= 1.0 {
        return Err(Error::Divergent(format!(
            "expected number of data points is infinite for concentration + discount = {} <= 1",
            concentration + discount
        )));
    }
    let v = mass * concentration * r / (concentration + discount - 1.0);
    Ok(Asymptotic {
        exact: v,
        asymptote: v,
    })
}

/// Φ(r) = γΓ(1+θ)/(αΓ(θ+α))·[Γ(θ+α+r)/Γ(θ+r) - Γ(θ+α)/Γ(θ)];
/// asymptote (γ/α)·Γ(θ+1)/Γ(θ+α)·r^α.
pub fn phi_3bnbp(r: f64, mass: f64, concentration: f64, discount: f64) -> Result<Asymptotic> {
    check_discount(discount)?;
    if !(r > 0.0) || !(mass >= 0.0) {
        return Err(Error::param("need r > 0 and mass >= 0"));
    }
    let (t, a) = (concentration, discount);
    if !(t > -a) {
        return Err(Error::param(format!(
            "concentration must exceed -discount, got {t}"
        )));
    }
    let pref = mass * (ln_gamma(1.0 + t) - ln_gamma(t + a)).exp() / a;
    // Γ(θ+α)/Γ(θ) = (θ/ (θ+α))·Γ(θ+α+1)/Γ(θ+1), which stays finite at θ <= 0.
    let at_zero = if t > 0.0 {
        (ln_gamma(t + a) - ln_gamma(t)).exp()
    } else {
        t / (t + a) * (ln_gamma(t + a + 1.0) - ln_gamma(t + 1.0)).exp()
    };
    let exact = pref * ((ln_gamma(t + a + r) - ln_gamma(t + r)).exp() - at_zero);
    Ok(Asymptotic {
        exact,
        asymptote: pref * r.powf(a),
    })
}

/// Φ_j(r) = γΓ(1+θ)/(Γ(1-α)Γ(θ+α))·Γ(j+r)/(Γ(j+1)Γ(r))·Γ(j-α)Γ(r+θ+α)/Γ(j+r+θ);
/// asymptote γΓ(1+θ)/(Γ(1-α)Γ(θ+α))·Γ(j-α)/Γ(j+1)·r^α. At α = 0 both reduce
/// to the beta-process forms.
pub fn phi_j_3bnbp(
    j: u64,
    r: f64,
    mass: f64,
    concentration: f64,
    discount: f64,
) -> Result<Asymptotic> {
    check_j(j)?;
    if !(0.0..1.0).contains(&discount) {
        return Err(Error::param(format!(
            "discount must lie in [0, 1), got {discount}"
        )));
    }
    if !(r > 0.0) || !(mass >= 0.0) || !(concentration > -discount) {
        return Err(Error::param(
            "need r > 0, mass >= 0 and concentration > -discount",
        ));
    }
    let (t, a, jf) = (concentration, discount, j as f64);
    let ln_c = ln_3bp_constant(mass, t, a) + ln_gamma(jf - a) - ln_gamma(jf + 1.0);
    let ln_exact =
        ln_c + ln_gamma(jf + r) - ln_gamma(r) + ln_gamma(r + t + a) - ln_gamma(jf + r + t);
    Ok(Asymptotic {
        exact: ln_exact.exp(),
        asymptote: (ln_c + a * r.ln()).exp(),
    })
}

/// Constant C in Φ ~ C·ξ^α for the three-parameter process, assembled in
/// closed form: γ^{1-α}/α·Γ(θ+1)/Γ(θ+α)·((θ+α-1)/θ)^α.
pub fn phi_vs_xi_constant_3bnbp(mass: f64, concentration: f64, discount: f64) -> f64 {
    let (t, a) = (concentration, discount);
    mass.powf(1.0 - a) / a
        * (ln_gamma(t + 1.0) - ln_gamma(t + a)).exp()
        * ((t + a - 1.0) / t).powf(a)
}

/// Constant C_j in Φ_j ~ C_j·ξ^α for the three-parameter process:
/// γ^{1-α}·Γ(θ+1)/(Γ(1-α)Γ(θ+α))·Γ(j-α)/Γ(j+1)·((θ+α-1)/θ)^α.
pub fn phi_j_vs_xi_constant_3bnbp(j: u64, mass: f64, concentration: f64, discount: f64) -> f64 {
    let (t, a, jf) = (concentration, discount, j as f64);
    let ln = ln_gamma(t + 1.0) - ln_gamma(1.0 - a) - ln_gamma(t + a) + ln_gamma(jf - a)
        - ln_gamma(jf + 1.0);
    mass.powf(1.0 - a) * ln.exp() * ((t + a - 1.0) / t).powf(a)
}

/// Dirichlet process with n customers: Φ(n) = Σ_{i<n} θ/(θ + i), asymptote θ·ln n.
pub fn phi_dp(n: u64, concentration: f64) -> Result<Asymptotic> {
    if !(concentration > 0.0) {
        return Err(Error::param(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    let exact = (0..n)
        .map(|i| concentration / (concentration + i as f64))
        .sum();
    Ok(Asymptotic {
        exact,
        asymptote: concentration * (n as f64).ln(),
    })
}

/// Dirichlet process: Φ_j(n) = (θ/j)·Γ(n+1)Γ(n+θ-j)/(Γ(n+1-j)Γ(n+θ)) for
/// j <= n, asymptote θ/j.
pub fn phi_j_dp(j: u64, n: u64, concentration: f64) -> Result<Asymptotic> {
    check_j(j)?;
    if !(concentration > 0.0) {
        return Err(Error::param(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    let t = concentration;
    let (jf, nf) = (j as f64, n as f64);
    let exact = if j > n {
        0.0
    } else {
        t / jf
            * (ln_gamma(nf + 1.0) + ln_gamma(nf + t - jf)
                - ln_gamma(nf + 1.0 - jf)
                - ln_gamma(nf + t))
            .exp()
    };
    Ok(Asymptotic {
        exact,
        asymptote: t / jf,
    })
}

/// Pitman–Yor process: E[K_n] = Γ(θ+1)Γ(θ+α+n)/(αΓ(θ+α)Γ(θ+n)) - θ/α,
/// asymptote Γ(θ+1)/(αΓ(θ+α))·n^α.
pub fn phi_pyp(n: u64, concentration: f64, discount: f64) -> Result<Asymptotic> {
    check_discount(discount)?;
    let (t, a, nf) = (concentration, discount, n as f64);
    if !(t > -a) {
        return Err(Error::param(format!(
            "concentration must exceed -discount, got {t}"
        )));
    }
    let c = (ln_gamma(t + 1.0) - ln_gamma(t + a)).exp() / a;
    let exact = if n == 0 {
        0.0
    } else {
        c * (ln_gamma(t + a + nf) - ln_gamma(t + nf)).exp() - t / a
    };
    Ok(Asymptotic {
        exact,
        asymptote: c * nf.powf(a),
    })
}

/// Pitman–Yor process size-j asymptote:
/// Γ(θ+1)/(Γ(1-α)Γ(θ+α))·Γ(j-α)/Γ(j+1)·n^α.
pub fn phi_j_pyp_asymptote(j: u64, n: u64, concentration: f64, discount: f64) -> Result<f64> {
    check_j(j)?;
    check_discount(discount)?;
    let (t, a, jf) = (concentration, discount, j as f64);
    let ln = ln_gamma(t + 1.0) - ln_gamma(1.0 - a) - ln_gamma(t + a) + ln_gamma(jf - a)
        - ln_gamma(jf + 1.0);
    Ok(ln.exp() * (n as f64).powf(a))
}
