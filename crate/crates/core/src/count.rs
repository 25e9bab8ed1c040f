//! Result record shared by every counting route.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    /// Negative pivots of the tridiagonal Sturm sequence.
    SturmSequence,
    /// Sum of Sturm counts over transverse modes.
    ModeSum,
    /// Negative pivots of a banded LDLᵀ of `K - λM`.
    BandedLdlt,
}

impl CountMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CountMethod::SturmSequence => "sturm",
            CountMethod::ModeSum => "modesum",
            CountMethod::BandedLdlt => "ldlt2d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Discretization {
    Line {
        a: f64,
        x_max: f64,
        n: usize,
        h: f64,
    },
    Mesh {
        n_x: usize,
        n_t: usize,
        x_max: f64,
        bandwidth: usize,
        unknowns: usize,
    },
}

impl Discretization {
    pub fn x_max(&self) -> f64 {
        match *self {
            Discretization::Line { x_max, .. } | Discretization::Mesh { x_max, .. } => x_max,
        }
    }
}

/// `N_λ`: the number of eigenvalues strictly below `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub lambda: f64,
    pub count: usize,
    pub method: CountMethod,
    pub discretization: Discretization,
    /// Nonzero only when a vanishing pivot forced `λ` to move down.
    pub shift_applied: f64,
    /// Number of transverse modes summed (mode-sum route only).
    pub modes_used: Option<usize>,
}
