pub mod classical;
mod clock;
pub mod error;
pub mod graph;
pub mod hierarchy;
pub mod ingest;
pub mod instances;
pub mod moment;
pub mod sdp;
pub mod theta;
pub mod verify;
pub mod words;

pub use classical::{alpha, alpha_exhaustive, AlphaResult};
pub use error::{Error, GraphError, IngestError, Result, SdpError, WordError};
pub use graph::{ExclusivityMultigraph, VertexWeightedGraph};
pub use ingest::{build_multigraph, parse_expression, BellExpression, BellTerm, EventTable, Part};
pub use moment::{assemble_sdp, build_skeleton, EntryKind, MomentSkeleton, NormalizationMode};
pub use sdp::{solve, SdpProblem, SdpSolution, SdpStatus, Tolerances};
pub use words::{adjoint, canonicalize, multiply, build_sequences, LevelSpec, ProjectorSymbol, ProjectorWord};
pub use hierarchy::{label_consistency_check, mtheta_bound, BoundOptions, BoundReport, LevelFamily};
pub use theta::{gls_theta, moment_theta, ThetaFormulation, ThetaResult};
