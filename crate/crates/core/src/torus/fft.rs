use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place unnormalized multi-dimensional DFT over a cube of side `side`,
/// stored row-major. Forward uses `e^{-2πi q m / side}`.
pub(crate) fn dft_nd(data: &mut [Complex64], side: usize, d: usize, inverse: bool) {
    debug_assert_eq!(data.len(), side.pow(d as u32));
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(side)
    } else {
        planner.plan_fft_forward(side)
    };
    if d == 1 {
        fft.process(data);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    for axis in 0..d {
        let stride = side.pow((d - 1 - axis) as u32);
        let block = stride * side;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (m, v) in line.iter_mut().enumerate() {
                    *v = data[base + m * stride];
                }
                fft.process(&mut line);
                for (m, v) in line.iter().enumerate() {
                    data[base + m * stride] = *v;
                }
            }
        }
    }
}
