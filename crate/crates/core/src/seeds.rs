//! Seed maps from trimaps or scribbles, and ground-truth masks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::check_dims;
use crate::propagation::{ClassId, NodeKind};

/// Foreground class for two-class (trimap) problems.
pub const FOREGROUND: ClassId = ClassId::FIRST;

/// Background class for two-class (trimap) problems.
pub fn background() -> ClassId {
    ClassId::from_index(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRole {
    /// Outside the region of interest; not a graph node.
    Ignored,
    Labeled(ClassId),
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedMap {
    width: usize,
    height: usize,
    classes: usize,
    roles: Vec<SeedRole>,
}

impl SeedMap {
    pub fn new(width: usize, height: usize, classes: usize, roles: Vec<SeedRole>) -> Result<Self> {
        check_dims(width, height, roles.len())?;
        if classes < 2 {
            return Err(Error::TooFewClasses(classes));
        }
        for role in &roles {
            if let SeedRole::Labeled(c) = role {
                if c.get() > classes {
                    return Err(Error::ClassOutOfRange {
                        class: c.get(),
                        classes,
                    });
                }
            }
        }
        Ok(Self {
            width,
            height,
            classes,
            roles,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn roles(&self) -> &[SeedRole] {
        &self.roles
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    /// Pixel indices that become graph nodes, in scan order.
    pub fn node_pixels(&self) -> Vec<usize> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| !matches!(r, SeedRole::Ignored))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn node_kinds(&self) -> Vec<NodeKind> {
        self.roles
            .iter()
            .filter_map(|r| match *r {
                SeedRole::Ignored => None,
                SeedRole::Labeled(c) => Some(NodeKind::Labeled(c)),
                SeedRole::Unlabeled => Some(NodeKind::Unlabeled),
            })
            .collect()
    }

    pub fn count(&self, pred: impl Fn(&SeedRole) -> bool) -> usize {
        self.roles.iter().filter(|r| pred(r)).count()
    }

    /// Number of distinct classes that have at least one seed.
    pub fn seeded_classes(&self) -> usize {
        let mut seen = vec![false; self.classes];
        for role in &self.roles {
            if let SeedRole::Labeled(c) = role {
                seen[c.index()] = true;
            }
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

/// Trimap levels: 0 ignored, 64 labeled background, 128 unlabeled,
/// 255 labeled foreground. Class 1 is foreground, class 2 background.
pub fn decode_trimap(width: usize, height: usize, mask: &[u8]) -> Result<SeedMap> {
    check_dims(width, height, mask.len())?;
    let roles = mask
        .iter()
        .enumerate()
        .map(|(i, &v)| match v {
            0 => Ok(SeedRole::Ignored),
            64 => Ok(SeedRole::Labeled(background())),
            128 => Ok(SeedRole::Unlabeled),
            255 => Ok(SeedRole::Labeled(FOREGROUND)),
            value => Err(Error::TrimapValue {
                value,
                row: i / width,
                col: i % width,
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    SeedMap::new(width, height, 2, roles)
}

/// A brush stroke: every point stamps a disk of `radius` pixels
/// (`dx*dx + dy*dy <= radius*radius`), clipped to the image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stroke {
    pub class: ClassId,
    /// `(x, y)` = `(column, row)`.
    pub points: Vec<(i64, i64)>,
    pub radius: u32,
}

impl Stroke {
    pub fn pixels(class: ClassId, points: Vec<(i64, i64)>) -> Self {
        Self {
            class,
            points,
            radius: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScribbleReport {
    /// Pixels `(x, y)` painted with two different classes; the later stroke won.
    pub conflicts: Vec<(usize, usize)>,
}

/// Rasterizes strokes in order over an all-unlabeled map. Stroke centers must
/// lie inside the image.
pub fn decode_scribbles(
    width: usize,
    height: usize,
    classes: usize,
    strokes: &[Stroke],
) -> Result<(SeedMap, ScribbleReport)> {
    check_dims(width, height, width * height)?;
    let mut roles = vec![SeedRole::Unlabeled; width * height];
    let mut report = ScribbleReport::default();
    for stroke in strokes {
        if stroke.class.get() > classes {
            return Err(Error::ClassOutOfRange {
                class: stroke.class.get(),
                classes,
            });
        }
        let r = i64::from(stroke.radius);
        for &(x, y) in &stroke.points {
            if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                return Err(Error::StrokeOutOfBounds {
                    x,
                    y,
                    width,
                    height,
                });
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy > r * r {
                        continue;
                    }
                    let (px, py) = (x + dx, y + dy);
                    if px < 0 || py < 0 || px >= width as i64 || py >= height as i64 {
                        continue;
                    }
                    let i = py as usize * width + px as usize;
                    if let SeedRole::Labeled(prev) = roles[i] {
                        if prev != stroke.class {
                            report.conflicts.push((px as usize, py as usize));
                        }
                    }
                    roles[i] = SeedRole::Labeled(stroke.class);
                }
            }
        }
    }
    if !report.conflicts.is_empty() {
        log::warn!(
            "{} scribbled pixel(s) received conflicting classes; last stroke wins",
            report.conflicts.len()
        );
    }
    Ok((SeedMap::new(width, height, classes, roles)?, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    Foreground,
    Background,
    Uncertain,
}

impl Truth {
    /// Class this truth value corresponds to, if any.
    pub fn class(self) -> Option<ClassId> {
        match self {
            Truth::Foreground => Some(FOREGROUND),
            Truth::Background => Some(background()),
            Truth::Uncertain => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    values: Vec<Truth>,
}

impl GroundTruth {
    pub fn new(width: usize, height: usize, values: Vec<Truth>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// `>= 224` foreground, `<= 31` background, anything between uncertain.
    pub fn from_gray(width: usize, height: usize, mask: &[u8]) -> Result<Self> {
        let values = mask
            .iter()
            .map(|&v| match v {
                224..=255 => Truth::Foreground,
                0..=31 => Truth::Background,
                _ => Truth::Uncertain,
            })
            .collect();
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[Truth] {
        &self.values
    }
}
