//! Per-pixel feature vectors.
//!
//! Column order (0-based): row, col, R, G, B, H, S, V, ExR, ExG, ExB,
//! MR, MG, MB, SDR, SDG, SDB, MH, MS, MV, SDH, SDS, SDV. The M*/SD* columns are
//! the mean and population standard deviation over the pixel and its
//! 8-connected neighbors, clipped at the image border.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 23;

/// Column names in feature order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "row", "col", "R", "G", "B", "H", "S", "V", "ExR", "ExG", "ExB", "MR", "MG", "MB", "SDR",
    "SDG", "SDB", "MH", "MS", "MV", "SDH", "SDS", "SDV",
];

/// Row-major RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        for (index, px) in pixels.iter().enumerate() {
            for &value in px {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::ChannelOutOfRange { index, value });
                }
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from interleaved 8-bit RGB, dividing each channel by 255.
    pub fn from_rgb8(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::SizeMismatch {
                width,
                height,
                expected: width * height * 3,
                actual: data.len(),
            });
        }
        check_dims(width, height, width * height)?;
        let pixels = data
            .chunks_exact(3)
            .map(|c| {
                [
                    f64::from(c[0]) / 255.0,
                    f64::from(c[1]) / 255.0,
                    f64::from(c[2]) / 255.0,
                ]
            })
            .collect();
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        self.pixels[row * self.width + col]
    }
}

pub(crate) fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    if len != width * height {
        return Err(Error::SizeMismatch {
            width,
            height,
            expected: width * height,
            actual: len,
        });
    }
    Ok(())
}

/// Per-feature weights applied after normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda([f64; FEATURE_COUNT]);

impl Lambda {
    pub fn ones() -> Self {
        Self([1.0; FEATURE_COUNT])
    }

    pub fn zeros() -> Self {
        Self([0.0; FEATURE_COUNT])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; FEATURE_COUNT] = values.try_into().map_err(|_| Error::LambdaLength {
            expected: FEATURE_COUNT,
            actual: values.len(),
        })?;
        for (index, &value) in arr.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::LambdaValue { index, value });
            }
        }
        Ok(Self(arr))
    }

    pub fn as_array(&self) -> &[f64; FEATURE_COUNT] {
        &self.0
    }
}

impl Default for Lambda {
    fn default() -> Self {
        Self::ones()
    }
}

/// Graph hyperparameters: neighbor count and feature weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegParams {
    pub k: usize,
    pub lambda: Lambda,
}

impl SegParams {
    pub fn new(k: usize, lambda: Lambda) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        Ok(Self { k, lambda })
    }
}

impl Default for SegParams {
    fn default() -> Self {
        Self {
            k: 10,
            lambda: Lambda::ones(),
        }
    }
}

/// Hexcone RGB to HSV. All components in `[0, 1]`, hue as a fraction of a turn.
/// Achromatic inputs get `H = 0` and `S = 0`.
pub fn rgb_to_hsv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    if delta <= 0.0 {
        return [0.0, 0.0, max];
    }
    let sector = if max == r {
        (g - b) / delta
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = sector / 6.0;
    if h < 0.0 {
        h += 1.0;
    }
    if h >= 1.0 {
        h -= 1.0;
    }
    [h, delta / max, max]
}

/// Excess color indices `(2R-G-B, 2G-R-B, 2B-R-G)`.
pub fn excess_components([r, g, b]: [f64; 3]) -> [f64; 3] {
    [2.0 * r - g - b, 2.0 * g - r - b, 2.0 * b - r - g]
}

/// A single-channel row-major plane.
#[derive(Debug, Clone, Copy)]
pub struct Plane<'a> {
    pub width: usize,
    pub height: usize,
    pub values: &'a [f64],
}

impl<'a> Plane<'a> {
    pub fn new(width: usize, height: usize, values: &'a [f64]) -> Result<Self> {
        check_dims(width, height, values.len())?;
        Ok(Self {
            width,
            height,
            values,
        })
    }
}

/// Mean and population standard deviation of the pixel and its existing
/// 8-connected neighbors (4, 6 or 9 samples).
pub fn neighborhood_stats(plane: Plane<'_>, row: usize, col: usize) -> (f64, f64) {
    let r0 = row.saturating_sub(1);
    let r1 = (row + 1).min(plane.height - 1);
    let c0 = col.saturating_sub(1);
    let c1 = (col + 1).min(plane.width - 1);
    let n = ((r1 - r0 + 1) * (c1 - c0 + 1)) as f64;

    let mut sum = 0.0;
    for r in r0..=r1 {
        for c in c0..=c1 {
            sum += plane.values[r * plane.width + c];
        }
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for r in r0..=r1 {
        for c in c0..=c1 {
            let d = plane.values[r * plane.width + c] - mean;
            ss += d * d;
        }
    }
    (mean, libm::sqrt(ss / n))
}

/// Dense `n x 23` feature matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn n_pixels(&self) -> usize {
        self.rows
    }

    pub fn n_features(&self) -> usize {
        FEATURE_COUNT
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(c).step_by(FEATURE_COUNT).copied()
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * FEATURE_COUNT);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        FeatureMatrix {
            rows: rows.len(),
            values,
        }
    }
}

/// Unnormalized features, one row per pixel in scan order.
pub fn raw_features(image: &RgbImage) -> Vec<[f64; FEATURE_COUNT]> {
    let (w, h) = (image.width, image.height);
    let n = image.len();

    // R, G, B, H, S, V planes.
    let mut planes: [Vec<f64>; 6] = core::array::from_fn(|_| Vec::with_capacity(n));
    for &px in &image.pixels {
        let hsv = rgb_to_hsv(px);
        for (plane, v) in planes.iter_mut().zip(px.iter().chain(hsv.iter())) {
            plane.push(*v);
        }
    }

    let mut out = Vec::with_capacity(n);
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            let px = image.pixels[i];
            let ex = excess_components(px);
            let mut f = [0.0; FEATURE_COUNT];
            f[0] = row as f64;
            f[1] = col as f64;
            f[2..5].copy_from_slice(&px);
            for (c, plane) in planes[3..].iter().enumerate() {
                f[5 + c] = plane[i];
            }
            f[8..11].copy_from_slice(&ex);
            // RGB block at 11..17, HSV block at 17..23.
            for (p, plane) in planes.iter().enumerate() {
                let (mean, sd) = neighborhood_stats(
                    Plane {
                        width: w,
                        height: h,
                        values: plane,
                    },
                    row,
                    col,
                );
                let base = if p < 3 { 11 } else { 17 };
                let c = p % 3;
                f[base + c] = mean;
                f[base + 3 + c] = sd;
            }
            out.push(f);
        }
    }
    out
}

/// Z-scores each column over all rows (population standard deviation), then
/// multiplies by the matching weight. Constant columns become zero.
pub fn normalize(raw: &[[f64; FEATURE_COUNT]], lambda: &Lambda) -> FeatureMatrix {
    let n = raw.len();
    let mut values = vec![0.0; n * FEATURE_COUNT];
    if n == 0 {
        return FeatureMatrix { rows: 0, values };
    }
    let nf = n as f64;
    for c in 0..FEATURE_COUNT {
        let first = raw[0][c];
        if raw.iter().all(|f| f[c] == first) {
            continue;
        }
        let mean = raw.iter().map(|f| f[c]).sum::<f64>() / nf;
        let var = raw
            .iter()
            .map(|f| {
                let d = f[c] - mean;
                d * d
            })
            .sum::<f64>()
            / nf;
        let sd = libm::sqrt(var);
        let weight = lambda.0[c];
        for (i, f) in raw.iter().enumerate() {
            values[i * FEATURE_COUNT + c] = (f[c] - mean) / sd * weight;
        }
    }
    FeatureMatrix { rows: n, values }
}

/// Raw features for every pixel, normalized over the whole image and weighted.
pub fn extract_features(image: &RgbImage, lambda: &Lambda) -> FeatureMatrix {
    normalize(&raw_features(image), lambda)
}

/// Like [`extract_features`] but takes the weights as a slice and rejects a
/// wrong length.
pub fn extract_features_with(image: &RgbImage, lambda: &[f64]) -> Result<FeatureMatrix> {
    Ok(extract_features(image, &Lambda::from_slice(lambda)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hsv_examples() {
        assert_eq!(rgb_to_hsv([1.0, 0.0, 0.0]), [0.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([0.5, 0.5, 0.5]), [0.0, 0.0, 0.5]);
        let [h, s, v] = rgb_to_hsv([0.0, 0.0, 1.0]);
        assert!(close(h, 2.0 / 3.0, 1e-15));
        assert_eq!((s, v), (1.0, 1.0));
        // Magenta sits at 300 degrees, exercising the negative-sector wrap.
        assert!(close(rgb_to_hsv([1.0, 0.0, 1.0])[0], 5.0 / 6.0, 1e-15));
        assert_eq!(rgb_to_hsv([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn excess_examples() {
        assert_eq!(excess_components([0.0, 1.0, 0.0]), [-1.0, 2.0, -1.0]);
        assert_eq!(excess_components([0.3, 0.3, 0.3]), [0.0, 0.0, 0.0]);
        assert_eq!(excess_components([1.0, 0.5, 0.25]), [1.25, -0.25, -1.0]);
    }

    #[test]
    fn neighborhood_examples() {
        let constant = [0.7; 12];
        let plane = Plane::new(4, 3, &constant).unwrap();
        for (r, c) in [(0, 0), (1, 1), (2, 3), (0, 2)] {
            let (m, sd) = neighborhood_stats(plane, r, c);
            assert!(close(m, 0.7, 1e-15));
            assert!(sd < 1e-15);
        }

        let spike = [0.0, 0.0, 0.0, 0.0, 9.0, 0.0, 0.0, 0.0, 0.0];
        let (m, sd) = neighborhood_stats(Plane::new(3, 3, &spike).unwrap(), 1, 1);
        assert!(close(m, 1.0, 1e-15));
        assert!(close(sd, 8f64.sqrt(), 1e-12));

        let corner = [0.0, 0.0, 0.0, 4.0];
        let (m, sd) = neighborhood_stats(Plane::new(2, 2, &corner).unwrap(), 0, 0);
        assert!(close(m, 1.0, 1e-15));
        assert!(close(sd, 3f64.sqrt(), 1e-12));
    }

    #[test]
    fn single_pixel_is_all_zero() {
        let img = RgbImage::new(1, 1, vec![[0.2, 0.4, 0.9]]).unwrap();
        let f = extract_features(&img, &Lambda::ones());
        assert_eq!(f.n_pixels(), 1);
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_lambda_annihilates() {
        let px = (0..12).map(|i| [i as f64 / 11.0, 0.5, 1.0 - i as f64 / 11.0]).collect();
        let img = RgbImage::new(4, 3, px).unwrap();
        let f = extract_features(&img, &Lambda::zeros());
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_by_two_position_columns() {
        let px = vec![[0.1; 3], [0.4; 3], [0.6; 3], [0.9; 3]];
        let img = RgbImage::new(2, 2, px).unwrap();
        let f = extract_features(&img, &Lambda::ones());
        // rows {0,0,1,1} and cols {0,1,0,1}: mean 0.5, sd 0.5.
        let rows: Vec<f64> = f.column(0).collect();
        let cols: Vec<f64> = f.column(1).collect();
        assert_eq!(rows, vec![-1.0, -1.0, 1.0, 1.0]);
        assert_eq!(cols, vec![-1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_lambda_and_pixels() {
        assert_eq!(
            Lambda::from_slice(&[1.0; 22]),
            Err(Error::LambdaLength {
                expected: 23,
                actual: 22
            })
        );
        let mut l = [1.0; 23];
        l[4] = -0.5;
        assert!(matches!(
            Lambda::from_slice(&l),
            Err(Error::LambdaValue { index: 4, .. })
        ));
        let img = RgbImage::new(1, 1, vec![[0.0; 3]]).unwrap();
        assert!(extract_features_with(&img, &[1.0; 24]).is_err());
        assert!(RgbImage::new(1, 1, vec![[1.5, 0.0, 0.0]]).is_err());
        assert!(RgbImage::new(0, 3, vec![]).is_err());
        assert!(RgbImage::new(2, 2, vec![[0.0; 3]; 3]).is_err());
        assert!(SegParams::new(0, Lambda::ones()).is_err());
    }

    #[test]
    fn from_rgb8_divides_by_255() {
        let img = RgbImage::from_rgb8(1, 1, &[255, 0, 51]).unwrap();
        assert_eq!(img.pixel(0, 0), [1.0, 0.0, 0.2]);
        assert!(RgbImage::from_rgb8(2, 1, &[0; 5]).is_err());
    }
}
