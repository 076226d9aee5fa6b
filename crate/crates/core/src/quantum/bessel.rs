//! Bessel functions of the first kind, `J_0(x) … J_m(x)`, by Miller's
//! backward recurrence normalized with `J_0 + 2 Σ J_{2k} = 1`.

/// Values `J_k(x)` for `k = 0..=m`, `x ≥ 0`.
pub fn bessel_j_sequence(x: f64, m: usize) -> Vec<f64> {
    assert!(
        x >= 0.0 && x.is_finite(),
        "bessel argument must be finite and nonnegative"
    );
    let mut out = vec![0.0; m + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // Start well above both m and x so the seed error decays away.
    let start = {
        let s = m.max(x.ceil() as usize) + 30 + (8.0 * x.cbrt()).ceil() as usize;
        s + s % 2
    };
    const BIG: f64 = 1e250;
    let (mut above, mut current) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // current = J_k, above = J_{k+1}
        if k <= m {
            out[k] = current;
        }
        if k % 2 == 0 {
            norm += 2.0 * current;
        }
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        if current.abs() > BIG {
            above /= BIG;
            current /= BIG;
            norm /= BIG;
            for v in out.iter_mut() {
                *v /= BIG;
            }
        }
    }
    out[0] = current;
    norm += current;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 9.1
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((j[2] - 0.114_903_484_931_900_5).abs() < 1e-15);
        let j = bessel_j_sequence(10.0, 1);
        assert!((j[0] - (-0.245_935_764_451_348_3)).abs() < 1e-14);
        assert!((j[1] - 0.043_472_746_168_861_44).abs() < 1e-14);
    }

    #[test]
    fn sum_rule_and_decay() {
        for x in [1e-8, 0.3, 7.5, 40.0, 150.0] {
            let m = (x as usize) + 60;
            let j = bessel_j_sequence(x, m);
            let sq: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((sq - 1.0).abs() < 1e-12, "x = {x}: {sq}");
            assert!(j[m].abs() < 1e-15);
        }
    }
}
