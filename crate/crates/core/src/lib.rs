//! Page curves of Gaussian boson sampling: Haar-averaged Rényi and von Neumann
//! entanglement entropies of squeezed vacua after a random passive circuit,
//! computed both from closed-form series and by Monte Carlo.

pub mod entropy;
pub mod error;
pub mod haar;
pub mod montecarlo;
pub mod pagecurve;
pub mod specfun;
pub mod state;
pub mod symplectic;

pub use entropy::{entropy, renyi_entropy, renyi_entropy_factored, von_neumann_entropy, EntropyValue};
pub use error::{Error, Result};
pub use haar::{haar_unitary, UnitaryMatrix};
pub use pagecurve::{average, ModeCount, PageCurveQuery, PageCurveValue, Regime, Truncation};
pub use state::{CovarianceMatrix, SqueezingConfig};
pub use symplectic::{symplectic_eigenvalues, SymplecticSpectrum};
