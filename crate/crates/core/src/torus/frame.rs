//! Constant coframes `dz_I ∧ dz̄_J` encoded as bitmasks: bits `0..g` are
//! `dz_k`, bits `g..2g` are `dz̄_k`.

pub type Mask = u8;

/// All masks of the given degree over `2g` bits, ascending.
pub fn frames(g: usize, degree: usize) -> Vec<Mask> {
    (0u16..(1u16 << (2 * g)))
        .filter(|m| m.count_ones() as usize == degree)
        .map(|m| m as Mask)
        .collect()
}

/// `(p, q)` type of a frame.
pub fn bidegree(g: usize, mask: Mask) -> (usize, usize) {
    let lo = (mask as u16) & ((1u16 << g) - 1);
    let hi = (mask as u16) >> g;
    (lo.count_ones() as usize, hi.count_ones() as usize)
}

/// Sign of `e_I ∧ e_J = ±e_{I∪J}`, or `None` when they overlap.
pub fn wedge_sign(a: Mask, b: Mask) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = a;
    while rest != 0 {
        let i = rest.trailing_zeros();
        inversions += (b & ((1u16 << i) - 1) as u8).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

/// Sign of `e_k ∧ e_I`; also the sign of the contraction `ι_k e_{I∪k}`.
pub fn insert_sign(k: usize, mask: Mask) -> f64 {
    let below = (mask as u16) & ((1u16 << k) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Human readable name such as `dz1^dzb2`.
pub fn frame_name(g: usize, mask: Mask) -> String {
    if mask == 0 {
        return "1".into();
    }
    let mut parts = Vec::new();
    for b in 0..2 * g {
        if mask & (1 << b) != 0 {
            let (kind, k) = if b < g { ("dz", b) } else { ("dzb", b - g) };
            parts.push(if g == 1 { kind.to_string() } else { format!("{kind}{}", k + 1) });
        }
    }
    parts.join("^")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(frames(2, 2).len(), 6);
        assert_eq!(frames(1, 1), vec![1, 2]);
        assert_eq!(binomial(6, 3), 20);
    }

    #[test]
    fn signs() {
        // dz̄ ∧ dz = −dz ∧ dz̄
        assert_eq!(wedge_sign(2, 1), Some(-1.0));
        assert_eq!(wedge_sign(1, 2), Some(1.0));
        assert_eq!(wedge_sign(1, 1), None);
        assert_eq!(insert_sign(1, 1), -1.0);
        assert_eq!(insert_sign(0, 2), 1.0);
        assert_eq!(wedge_sign(1 << 1, 0b101), Some(-1.0));
    }

    #[test]
    fn bidegrees() {
        assert_eq!(bidegree(2, 0b0101), (1, 1));
        assert_eq!(bidegree(1, 0b10), (0, 1));
        assert_eq!(frame_name(1, 0b11), "dz^dzb");
    }
}
