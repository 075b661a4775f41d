use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Each variant maps to a stable
/// machine-readable code through [`Error::code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("potential amplitude V0 must be non-negative, got {0}")]
    SpecV0Nonpositive(f64),
    #[error("field amplitude B0 must be positive, got {0}")]
    SpecB0Nonpositive(f64),
    #[error("exponent {name} must be finite and non-negative, got {value}")]
    SpecExponent { name: &'static str, value: f64 },
    #[error("tabulated field: {0}")]
    SpecTable(String),
    #[error("malformed field spec: {0}")]
    SpecParse(String),
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("radius {r} lies beyond the tabulated mesh end {end}")]
    Extrapolation { r: f64, end: f64 },
    #[error("grid radius must be positive, got {0}")]
    GridRadius(f64),
    #[error("grid needs at least 16 cells, got {0}")]
    GridCells(usize),
    #[error("invalid window ({lo}, {hi})")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("window holds {count} eigenvalues, above the limit of {limit}; shrink the window")]
    WindowTooLarge { count: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("zero mode m={m} is not normalizable on [0, R]: tail mass fraction {tail:.3e}")]
    NotNormalizable { m: u32, tail: f64 },
    #[error("no crossing of the Landau level condition found for n={n} below radius {limit}")]
    NoCrossing { n: usize, limit: f64 },
    #[error("gauge function is path dependent: straight {straight}, L-path {l_path}")]
    Gauge { straight: f64, l_path: f64 },
    #[error("quadrature did not converge ({0}); try a finer patch")]
    Resolution(String),
}

impl Error {
    /// Stable diagnostic code, used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SpecV0Nonpositive(_) => "E_SPEC_V0_NONPOSITIVE",
            Error::SpecB0Nonpositive(_) => "E_SPEC_B0_NONPOSITIVE",
            Error::SpecExponent { .. } => "E_SPEC_EXPONENT",
            Error::SpecTable(_) => "E_SPEC_TABLE",
            Error::SpecParse(_) => "E_SPEC_PARSE",
            Error::NegativeRadius(_) => "E_DOMAIN_RADIUS",
            Error::Extrapolation { .. } => "E_EXTRAPOLATION",
            Error::GridRadius(_) => "E_GRID_RADIUS",
            Error::GridCells(_) => "E_GRID_CELLS",
            Error::InvalidWindow { .. } => "E_WINDOW_INVALID",
            Error::WindowTooLarge { .. } => "E_WINDOW_REFUSED",
            Error::Precondition(_) => "E_PRECONDITION",
            Error::NotNormalizable { .. } => "E_NOT_NORMALIZABLE",
            Error::NoCrossing { .. } => "E_NO_CROSSING",
            Error::Gauge { .. } => "E_GAUGE",
            Error::Resolution(_) => "E_RESOLUTION",
        }
    }
}
