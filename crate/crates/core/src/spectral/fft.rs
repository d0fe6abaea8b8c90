use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

// Rows of 2-d grids are transformed in parallel above this size.
const PARALLEL_MIN: usize = 1 << 14;

/// Unnormalized transform in place (`exp(-i..)` forward, `exp(+i..)` inverse).
pub(crate) fn transform(grid: &GridSpec, data: &mut [Complex64], dir: Direction) {
    let n = grid.n;
    let fft = plan(n, dir);
    match grid.d {
        1 => fft.process(data),
        _ => {
            rows(&fft, data, n);
            transpose(data, n);
            rows(&fft, data, n);
            transpose(data, n);
        }
    }
}

fn rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    let scratch_len = fft.get_inplace_scratch_len();
    if data.len() >= PARALLEL_MIN {
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    } else {
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        for row in data.chunks_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
