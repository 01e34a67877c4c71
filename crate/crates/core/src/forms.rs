//! Components of 1- and 2-forms on the orthonormal coframe `{σ*, (jσ)*, ϑ}`,
//! and the three-dimensional Hodge star.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Coef;

/// For 2-forms the components are ordered `(σ*∧(jσ)*, σ*∧ϑ, (jσ)*∧ϑ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormComponents<T> {
    pub degree: usize,
    pub c: [T; 3],
}

impl<T: Coef> FormComponents<T> {
    pub fn new(degree: usize, c: [T; 3]) -> Result<Self> {
        if degree == 1 || degree == 2 {
            Ok(FormComponents { degree, c })
        } else {
            Err(Error::BadDegree(degree))
        }
    }

    pub fn one(c: [T; 3]) -> Self {
        FormComponents { degree: 1, c }
    }

    pub fn two(c: [T; 3]) -> Self {
        FormComponents { degree: 2, c }
    }

    pub fn norm(&self) -> f64 {
        self.c.iter().map(|x| x.magnitude_sq()).sum::<f64>().sqrt()
    }

    pub fn minus(&self, other: &Self) -> Self {
        FormComponents {
            degree: self.degree,
            c: [0, 1, 2].map(|k| self.c[k].minus(&other.c[k])),
        }
    }
}

/// Hodge dual for the volume `orient_sign · σ*∧(jσ)*∧ϑ`.
pub fn hodge3<T: Coef>(form: &FormComponents<T>, orient_sign: f64) -> Result<FormComponents<T>> {
    let [a, b, c] = &form.c;
    let o = orient_sign;
    match form.degree {
        // ⋆σ* = (jσ)*∧ϑ, ⋆(jσ)* = −σ*∧ϑ, ⋆ϑ = σ*∧(jσ)*
        1 => Ok(FormComponents::two([c.scaled(o), b.scaled(-o), a.scaled(o)])),
        2 => Ok(FormComponents::one([c.scaled(o), b.scaled(-o), a.scaled(o)])),
        d => Err(Error::BadDegree(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coframe_duals() {
        let s = FormComponents::one([1.0, 0.0, 0.0]);
        assert_eq!(hodge3(&s, 1.0).unwrap().c, [0.0, 0.0, 1.0]);
        let w = FormComponents::two([1.0, 0.0, 0.0]);
        let t = hodge3(&w, 1.0).unwrap();
        assert_eq!((t.degree, t.c), (1, [0.0, 0.0, 1.0]));
    }

    #[test]
    fn rejects_other_degrees() {
        assert!(matches!(FormComponents::new(3, [0.0; 3]), Err(Error::BadDegree(3))));
        let bad = FormComponents { degree: 0, c: [1.0; 3] };
        assert!(hodge3(&bad, 1.0).is_err());
    }

    #[test]
    fn star_is_an_isometric_involution() {
        let f = FormComponents::two([0.3, -1.7, 2.2]);
        for o in [1.0, -1.0] {
            let ss = hodge3(&hodge3(&f, o).unwrap(), o).unwrap();
            assert_eq!(ss, f);
            assert!((hodge3(&f, o).unwrap().norm() - f.norm()).abs() < 1e-15);
        }
    }
}
