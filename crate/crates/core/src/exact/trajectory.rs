use std::fmt;

use serde::{Deserialize, Serialize};

/// A configuration given by its signed vertical stretches `(l_1, ..., l_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trajectory {
    pub stretches: Vec<i64>,
}

impl Trajectory {
    pub fn new(stretches: Vec<i64>) -> Self {
        Self { stretches }
    }

    /// Number of monomers, `N + sum |l_i|`.
    pub fn length(&self) -> u64 {
        self.stretches.iter().map(|l| l.unsigned_abs() + 1).sum()
    }

    /// Number of self-touchings, i.e. the energy in units of `beta`.
    pub fn hamiltonian(&self) -> u64 {
        self.stretches.windows(2).map(|w| touching(w[0], w[1])).sum()
    }
}

/// `min(|x|, |y|)` when the stretches point in opposite directions, else 0.
pub fn touching(x: i64, y: i64) -> u64 {
    if (x < 0 && y > 0) || (x > 0 && y < 0) {
        x.unsigned_abs().min(y.unsigned_abs())
    } else {
        0
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.stretches.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energies() {
        assert_eq!(Trajectory::new(vec![3, -2]).hamiltonian(), 2);
        assert_eq!(Trajectory::new(vec![3, 2]).hamiltonian(), 0);
        assert_eq!(Trajectory::new(vec![0, -5]).hamiltonian(), 0);
        assert_eq!(Trajectory::new(vec![2, -1, 0, 3]).hamiltonian(), 1);
        assert_eq!(Trajectory::new(vec![2, -1, 0, 3]).length(), 10);
        assert_eq!(Trajectory::new(vec![1, -2, 3, -1]).to_string(), "1,-2,3,-1");
    }
}
