use num_complex::Complex64 as C64;

use super::{SpatialGrid, Validate, Variant, Violation};
use crate::numerics::{principal_sqrt, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JostKind {
    /// Plane wave (0, e^{i lambda x}) at +infinity.
    Psi,
    /// Plane wave (e^{-i lambda x}, 0) at -infinity.
    Phi,
    /// Plane wave (e^{-i lambda x}, 0) at +infinity.
    PsiBar,
    /// Plane wave (0, e^{i lambda x}) at -infinity.
    PhiBar,
}

impl JostKind {
    pub const ALL: [JostKind; 4] = [JostKind::Psi, JostKind::Phi, JostKind::PsiBar, JostKind::PhiBar];

    /// Normalized at x_max (true) or at x_min (false).
    pub fn from_right(self) -> bool {
        matches!(self, JostKind::Psi | JostKind::PsiBar)
    }

    /// Asymptotic plane wave of this solution at spectral value lambda.
    pub fn plane_wave(self, lambda: C64, x: f64) -> [C64; 2] {
        let zero = C64::new(0.0, 0.0);
        match self {
            JostKind::Psi | JostKind::PhiBar => [zero, (I * lambda * x).exp()],
            JostKind::Phi | JostKind::PsiBar => [(-I * lambda * x).exp(), zero],
        }
    }
}

/// Jost solutions of one system at one spectral value, sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JostField {
    pub grid: SpatialGrid,
    /// zeta for the energy-dependent system, lambda otherwise.
    pub spectral_value: C64,
    pub variant: Variant,
    pub psi: Option<Vec<[C64; 2]>>,
    pub phi: Option<Vec<[C64; 2]>>,
    pub psi_bar: Option<Vec<[C64; 2]>>,
    pub phi_bar: Option<Vec<[C64; 2]>>,
}

impl JostField {
    pub fn empty(grid: SpatialGrid, spectral_value: C64, variant: Variant) -> Self {
        JostField {
            grid,
            spectral_value,
            variant,
            psi: None,
            phi: None,
            psi_bar: None,
            phi_bar: None,
        }
    }

    /// The lambda that enters the plane waves.
    pub fn lambda(&self) -> C64 {
        match self.variant {
            Variant::EnergyDependent => self.spectral_value * self.spectral_value,
            _ => self.spectral_value,
        }
    }

    pub fn zeta(&self) -> C64 {
        match self.variant {
            Variant::EnergyDependent => self.spectral_value,
            _ => principal_sqrt(self.spectral_value),
        }
    }

    pub fn get(&self, kind: JostKind) -> Option<&Vec<[C64; 2]>> {
        match kind {
            JostKind::Psi => self.psi.as_ref(),
            JostKind::Phi => self.phi.as_ref(),
            JostKind::PsiBar => self.psi_bar.as_ref(),
            JostKind::PhiBar => self.phi_bar.as_ref(),
        }
    }

    pub fn set(&mut self, kind: JostKind, samples: Vec<[C64; 2]>) {
        let slot = match kind {
            JostKind::Psi => &mut self.psi,
            JostKind::Phi => &mut self.phi,
            JostKind::PsiBar => &mut self.psi_bar,
            JostKind::PhiBar => &mut self.phi_bar,
        };
        *slot = Some(samples);
    }

    /// Copies the populated columns of `other` into `self`.
    pub fn merge(mut self, other: JostField) -> Self {
        for kind in JostKind::ALL {
            if let Some(s) = other.get(kind) {
                self.set(kind, s.clone());
            }
        }
        self
    }
}

impl Validate for JostField {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.grid.len();
        let lambda = self.lambda();
        for kind in JostKind::ALL {
            let Some(s) = self.get(kind) else { continue };
            if s.len() != n {
                out.push(Violation::new("sample count", None, format!("{kind:?} has {} samples", s.len())));
                continue;
            }
            let (i, x) = if kind.from_right() {
                (n - 1, self.grid.x_max())
            } else {
                (0, self.grid.x_min())
            };
            let want = kind.plane_wave(lambda, x);
            let scale = want[0].norm().max(want[1].norm());
            let err = (s[i][0] - want[0]).norm().max((s[i][1] - want[1]).norm());
            if !(err <= 1e-12 * scale) {
                out.push(Violation::new(
                    "boundary asymptotics",
                    Some(i),
                    format!("{kind:?} deviates by {err:.3e}"),
                ));
            }
        }
        out
    }
}
