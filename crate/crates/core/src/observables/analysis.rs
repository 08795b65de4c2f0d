//! Deterministic feature extraction from sampled curves: local maxima,
//! oscillation periods and blockade windows.

/// Indices of interior local maxima. A run of equal samples rising on the
/// left and falling on the right counts once, at its middle index.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn mean_spacing(positions: &[f64]) -> Option<f64> {
    if positions.len() < 2 {
        return None;
    }
    Some((positions[positions.len() - 1] - positions[0]) / (positions.len() - 1) as f64)
}

/// Mean spacing of successive local maxima with `t ∈ [t_lo, t_hi]`.
pub fn period_from_maxima(t: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> Option<f64> {
    let peaks: Vec<f64> = local_maxima(values)
        .into_iter()
        .map(|i| t[i])
        .filter(|&x| x >= t_lo && x <= t_hi)
        .collect();
    mean_spacing(&peaks)
}

/// Window over which the fast period is measured, in units of 1/κ.
pub const FAST_WINDOW: (f64, f64) = (0.0, 2.0);

/// Fast oscillation period: mean spacing of maxima over [`FAST_WINDOW`].
pub fn fast_period(t: &[f64], values: &[f64]) -> Option<f64> {
    period_from_maxima(t, values, FAST_WINDOW.0, FAST_WINDOW.1)
}

/// Centered moving average of `width` samples; entries whose window does not
/// fit are `None`.
pub fn boxcar(values: &[f64], width: usize) -> Vec<Option<f64>> {
    let width = width.max(1);
    let half = width / 2;
    let n = values.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + values[i];
    }
    (0..n)
        .map(|i| {
            let lo = i.checked_sub(half)?;
            let hi = lo + width;
            (hi <= n).then(|| (prefix[hi] - prefix[lo]) / width as f64)
        })
        .collect()
}

/// Height of the maximum at `k` above the higher of the two minima that
/// separate it from taller samples (or the ends of the series).
pub fn prominence(values: &[f64], k: usize) -> f64 {
    let h = values[k];
    let side_min = |range: &mut dyn Iterator<Item = usize>| {
        let mut m = h;
        for i in range {
            if values[i] > h {
                break;
            }
            m = m.min(values[i]);
        }
        m
    };
    let left = side_min(&mut (0..k).rev());
    let right = side_min(&mut (k + 1..values.len()));
    h - left.max(right)
}

/// Maxima of the smoothed curve less prominent than this fraction of its
/// range are ripple, not modulation.
pub const SLOW_PROMINENCE: f64 = 1e-3;

/// Slow modulation period: the series is low-passed with a boxcar one fast
/// period wide and the maxima of the smoothed curve with `t <= t_hi` are
/// spaced. Maxima below [`SLOW_PROMINENCE`] are dropped.
pub fn slow_period(t: &[f64], values: &[f64], fast_period: f64, t_hi: f64) -> Option<f64> {
    if t.len() < 3 {
        return None;
    }
    let dt = t[1] - t[0];
    let width = (fast_period / dt).round() as usize;
    let smooth = boxcar(values, width);
    let (idx, vals): (Vec<usize>, Vec<f64>) = smooth
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .filter(|&(i, _)| t[i] <= t_hi)
        .unzip();
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = SLOW_PROMINENCE * (hi - lo);
    let peaks: Vec<f64> = local_maxima(&vals)
        .into_iter()
        .filter(|&k| prominence(&vals, k) >= floor)
        .map(|k| t[idx[k]])
        .collect();
    mean_spacing(&peaks)
}

/// Contiguous runs `[first, last]` of `true` entries.
pub fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &m) in mask.iter().enumerate() {
        match (m, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, mask.len() - 1));
    }
    out
}

/// Grid points where pairs bunch and triples antibunch: g⁽²⁾(0) > 1 and
/// g⁽³⁾(0) < 1. NaN entries (failed points) never qualify.
pub fn blockade_mask(g2: &[f64], g3: &[f64]) -> Vec<bool> {
    g2.iter()
        .zip(g3)
        .map(|(&a, &b)| a > 1.0 && b < 1.0)
        .collect()
}

/// Measure of the blockade set on a uniform grid: member count × grid step.
pub fn window_width(grid: &[f64], mask: &[bool]) -> f64 {
    if grid.len() < 2 {
        return 0.0;
    }
    let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    mask.iter().filter(|&&m| m).count() as f64 * step
}
