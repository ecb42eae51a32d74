//! Wilson-loop expectation values for two-dimensional Yang–Mills on the plane,
//! computed as power series in the coupling λ.
//!
//! Four independent routes are provided and cross-checked:
//!
//! * chord-diagram sums in partial axial gauge ([`diagram_engine`], continuum and lattice),
//! * discretized stochastic parallel transport in complete axial gauge ([`lattice_transport`]),
//! * exact heat-kernel closed forms ([`exact_reference`]),
//! * Monte-Carlo white-noise holonomy ([`mc_oracle`]).

pub mod curve_geometry;
pub mod diagram_engine;
pub mod error;
pub mod exact_reference;
pub mod gauge_covariance;
pub mod lattice_transport;
pub mod lie_core;
pub mod mc_oracle;
pub mod wick_algebra;

pub use curve_geometry::{build_loop, AdmissibleLoop, Direction, HorizontalCurve};
pub use diagram_engine::{
    wilson_series, wilson_series_continuum_pax, wilson_series_lattice, EngineConfig, SeriesResult,
};
pub use error::{Error, Result};
pub use exact_reference::{exact_disjoint_product, exact_simple_loop, ExactValue};
pub use gauge_covariance::{covariance_fn, green_scalar, CovarianceSpec, GaugeChoice};
pub use lattice_transport::Lattice;
pub use lie_core::{lie_factor, make_representation, ChordDiagram, GroupId, RepId, Representation};
pub use mc_oracle::{mc_wilson, McEstimate};
pub use wick_algebra::{FormalSeries, Monomial, Slot, SlotKind};
