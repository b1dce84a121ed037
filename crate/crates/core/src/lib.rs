pub mod error;
pub mod exactness;
pub mod moment;
pub mod poly;
pub mod quotient;
pub mod rational;
pub mod sdp;
pub mod thetaops;

pub use error::{Result, ThetaError};
pub use poly::{compare_monomials, normal_form, Monomial, MonomialOrder, Polynomial, ReducerSet};
pub use rational::Rational;
pub use quotient::{Graph, IdealSpec, QuotientOracle, ThetaBasis};
pub use moment::{build_moment_template, instantiate, MomentTemplate, MomentVector};
pub use sdp::{solve, SdpOptions, SdpProblem, SdpSolution, SdpStatus, Sense};
pub use thetaops::{
    extract_certificate, maximize_linear, membership, ray_shoot, support_contour, trace_boundary_2d, Certificate, CertificateMode,
    Maximization, Membership, RayOutcome, ThetaBodyProblem,
};
pub use exactness::{enumerate_facets, level_report, th1_exact_finite, Facet, LevelReport};
