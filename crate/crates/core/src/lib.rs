//! Numerical verification of `(P, Q)` complex hypercontractivity for the
//! Mahler transform in Gauss space.
//!
//! For increasing `P, Q : [0, ∞) → [0, ∞)` and `z` in the closed unit disk
//! the inequality of interest is
//!
//! ```text
//! Q⁻¹(E Q(|T_z f|)) ≤ P⁻¹(E P(|f|))
//! ```
//!
//! over complex polynomials `f` on `ℝ^k` with the standard Gaussian
//! measure. The crate provides:
//!
//! * [`hermite`]: polynomials in the monomial and Hermite bases, `T_z`.
//! * [`quad`]: Gauss–Hermite quadrature and a seeded Monte Carlo oracle.
//! * [`scalarfn`]: `P`, `Q`, `F = Q∘P⁻¹` with derivatives and inverses.
//! * [`conditions`]: the pointwise local condition, regions, the lens, `r*`
//!   and the convexity hypotheses on `F`.
//! * [`flow`]: the interpolating flow `C(s)`, the global margin and the
//!   second-order necessity probe.
//! * [`discrete`]: the Hamming-cube analogue.
//! * [`parse`] and [`report`]: text forms and deterministic JSON/CSV.
//!
//! ```
//! use pqhyper::{check_local, make_power, ComplexParam, FnPair, TGrid};
//!
//! let pair = FnPair::new(make_power(2.0)?, make_power(4.0)?);
//! let z = ComplexParam::real(0.5)?;
//! let rep = check_local(&pair, z, &TGrid::default())?;
//! assert!(rep.holds);
//! assert!((rep.min_margin - 0.5).abs() < 1e-12);
//! # Ok::<(), pqhyper::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod discrete;
pub mod error;
pub mod flow;
pub mod hermite;
pub mod integrate;
pub mod parse;
pub mod quad;
pub mod report;
pub mod scalarfn;

pub use conditions::{
    check_local, convexity_report, lens_contains, lens_cp, local_margin, r_star, scan_region, weissler_margin,
    RegionSpec, TGrid,
};
pub use discrete::{discrete_map, discrete_profile, mfunctional_midpoint, two_point_margin, CubeFn};
pub use error::{Error, Result};
pub use flow::{epsilon_sweep, flow_monotonicity, global_check, necessity_probe, FlowConfig};
pub use hermite::{random_hermite, Basis, CPoly, ComplexParam, MultiIndex};
pub use parse::{parse_complex, parse_fn, parse_pair, parse_poly};
pub use quad::QuadRule;
pub use scalarfn::{
    compose_f, make_chain, make_exp, make_generator, make_hariya_companion, make_linear, make_log1p, make_plog,
    make_power, make_sum, FnPair, Func, ScalarFn,
};

/// The guide's code samples, compiled and run as doc-tests.
#[cfg(doctest)]
pub mod book {
    macro_rules! chapters {
        ($($name:ident => $file:literal),* $(,)?) => {
            $(
                #[doc = include_str!(concat!("../../../book/src/", $file))]
                pub mod $name {}
            )*
        };
    }
    chapters!(
        introduction => "introduction.md",
        polynomials => "polynomials.md",
        quadrature => "quadrature.md",
        functions => "functions.md",
        local_condition => "local-condition.md",
        regions => "regions.md",
        convexity => "convexity.md",
        flow => "flow.md",
        necessity => "necessity.md",
        discrete => "discrete.md",
        cli => "cli.md",
    );
}
