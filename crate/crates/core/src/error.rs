use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

/// One line of the synthesis diagnostic trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub step: u8,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate lattice: |nu| = {nu:e}")]
    DegenerateLattice { nu: f64 },
    #[error("steering direction ({u0}, {v0}) outside the unit disk")]
    InvalidSteering { u0: f64, v0: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("grid holds {got} weights, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("index ({p}, {q}) outside the {pp}x{qq} grid")]
    IndexOutOfRange { p: usize, q: usize, pp: usize, qq: usize },
    #[error("duplicate index ({p}, {q})")]
    DuplicateIndex { p: usize, q: usize },
    #[error("empty index set")]
    EmptySet,
    #[error("not a difference set: lag ({s}, {t}) counts {found}, expected {expected}")]
    NotADifferenceSet { s: usize, t: usize, found: usize, expected: usize },
    #[error("{p} and {q} are not twin primes")]
    NotTwinPrimes { p: usize, q: usize },
    #[error("polynomial {poly:#x} is not primitive of degree {m}")]
    NonPrimitivePolynomial { m: u32, poly: u64 },
    #[error("{p} and {q} are not coprime")]
    NotCoprime { p: usize, q: usize },
    #[error("search space of {cells} cells exceeds the limit {limit}")]
    SearchSpaceTooLarge { cells: usize, limit: usize },
    #[error("descriptors (P={p}, Q={q}, H={h}, gamma={gamma}) are inconsistent")]
    InvalidDescriptors { p: usize, q: usize, h: usize, gamma: usize },
    #[error("tabulated element pattern queried outside its table at ({u}, {v})")]
    TabulatedOutOfRange { u: f64, v: f64 },
    #[error("no visible direction outside the mainlobe")]
    EmptySidelobeRegion,
    #[error("pattern is flat, no sidelobe structure")]
    FlatPattern,
    #[error("no -3 dB crossing below 90 degrees")]
    BeamNotResolved,
    #[error("direction ({u}, {v}) is not visible")]
    InvisibleDirection { u: f64, v: f64 },
    #[error("no visible off-peak sample direction")]
    NoVisibleSamples,
    #[error("aperture {p}x{q} too small for the mid-point estimator")]
    ApertureTooSmall { p: usize, q: usize },
    #[error("element pattern inadmissible for the target level")]
    ElementInadmissible,
    #[error("no feasible lattice in the search box")]
    NoFeasibleLattice,
    #[error("synthesis infeasible after {} trace entries", trace.len())]
    Infeasible { trace: Vec<TraceEntry> },
    #[error("numerical failure: {0}")]
    Numeric(&'static str),
}
