use crate::error::Result;

/// Compares an analytic gradient against central finite differences.
///
/// `f` maps a point to `(value, gradient)`. Returns the maximum over
/// coordinates of `|fd - ad| / max(1, |fd|, |ad|)`.
pub fn grad_check<F>(mut f: F, point: &[f64], step: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (_, analytic) = f(point)?;
    let mut probe = point.to_vec();
    let mut worst = 0.0f64;
    for i in 0..point.len() {
        probe[i] = point[i] + step;
        let (plus, _) = f(&probe)?;
        probe[i] = point[i] - step;
        let (minus, _) = f(&probe)?;
        probe[i] = point[i];
        let fd = (plus - minus) / (2.0 * step);
        let ad = analytic[i];
        let err = (fd - ad).abs() / 1f64.max(fd.abs()).max(ad.abs());
        worst = worst.max(err);
    }
    Ok(worst)
}
