//! Adaptive Dormand–Prince 5(4) integrator for the oracle ODEs.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` in place. The per-component
/// error target is `tol · (1 + |y|)`. Returns the number of accepted steps.
pub(crate) fn dopri45(
    y: &mut [f64],
    t0: f64,
    t1: f64,
    tol: f64,
    mut f: impl FnMut(f64, &[f64], &mut [f64]),
) -> usize {
    let dim = y.len();
    if t1 <= t0 || dim == 0 {
        return 0;
    }
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut t = t0;
    let mut h = (t1 - t0).min(1e-4);
    let mut accepted = 0;
    f(t, y, &mut k[0]);
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (r, a) in A[s][..s].iter().enumerate() {
                    acc += h * a * k[r][i];
                }
                stage[i] = acc;
            }
            f(t + C[s] * h, &stage, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += h * B[s] * k[s][i];
                lo += h * B_LOW[s] * k[s][i];
            }
            y_new[i] = hi;
            let scale = tol * (1.0 + y[i].abs().max(hi.abs()));
            err = err.max((hi - lo).abs() / scale);
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            // first-same-as-last: the last stage is f at the new point
            k.swap(0, 6);
            accepted += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    accepted
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut y = [1.0, 2.0];
        dopri45(&mut y, 0.0, 2.0, 1e-12, |_, y, dy| {
            dy[0] = -3.0 * y[0];
            dy[1] = y[0] - y[1];
        });
        assert!((y[0] - (-6.0f64).exp()).abs() < 1e-11);
        // y1 = 2e^{-t} + (e^{-t} - e^{-3t})/2
        let want = 2.0 * (-2.0f64).exp() + 0.5 * ((-2.0f64).exp() - (-6.0f64).exp());
        assert!((y[1] - want).abs() < 1e-11);
    }

    #[test]
    fn forced_equation() {
        let mut y = [0.0];
        dopri45(&mut y, 0.0, 1.0, 1e-12, |t, _, dy| dy[0] = (5.0 * t).cos());
        assert!((y[0] - 5f64.sin() / 5.0).abs() < 1e-11);
    }
}
