//! Fixtures shared by the engine benchmarks.

use hodge_core::hodge_recursion::hodge_potentials;
use hodge_core::DiffPoly;

/// H_g from the shared system, computed once per process.
pub fn potential(g: u32) -> DiffPoly {
    hodge_potentials(g).expect("potentials").potential(g).expect("computed").clone()
}

/// A dense polynomial in v1..v_n with negative powers of v1, for ring arithmetic.
pub fn dense(n: usize) -> DiffPoly {
    let mut p = DiffPoly::zero();
    for m in 2..=n {
        let term = &DiffPoly::jet(m) * &DiffPoly::jet_pow(1, 1 - m as i32);
        p = &p + &term;
    }
    &p + &DiffPoly::log_v1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_nonzero() {
        assert_eq!(dense(5).len(), 5);
        assert!(!potential(1).is_zero());
    }
}
