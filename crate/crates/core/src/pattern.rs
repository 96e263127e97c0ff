//! Two-class planar point patterns: data model, CSV ingestion, and the
//! generators for the null (CSR independence) and the parametric
//! segregation/association alternatives.
//!
//! All generators are pure functions of their parameters and a seed, so equal
//! seeds give bit-identical patterns across runs and thread counts.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Class label of a point. Patterns in this crate are strictly two-class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    One,
    Two,
}

impl Class {
    pub const BOTH: [Class; 2] = [Class::One, Class::Two];

    /// 0-based index, for addressing 2x2 arrays.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Class::One => 0,
            Class::Two => 1,
        }
    }

    /// 1-based label as used in data files.
    #[inline]
    pub fn label(self) -> u8 {
        match self {
            Class::One => 1,
            Class::Two => 2,
        }
    }

    #[inline]
    pub fn other(self) -> Class {
        match self {
            Class::One => Class::Two,
            Class::Two => Class::One,
        }
    }

    pub fn from_label(label: u8) -> Option<Class> {
        match label {
            1 => Some(Class::One),
            2 => Some(Class::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Axis-aligned rectangular study region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Region> {
        if !(x_min < x_max && y_min < y_max)
            || !(x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite())
        {
            return Err(Error::BadRegion);
        }
        Ok(Region {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn unit_square() -> Region {
        Region {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 1.0,
            y_max: 1.0,
        }
    }

    /// Smallest region containing all points. Zero-extent sides are widened
    /// symmetrically so the result is always a valid region.
    pub fn bounding_box(points: &[(f64, f64)]) -> Result<Region> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut x_min = f64::INFINITY;
        let mut y_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for &(x, y) in points {
            x_min = x_min.min(x);
            y_min = y_min.min(y);
            x_max = x_max.max(x);
            y_max = y_max.max(y);
        }
        if x_min == x_max {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if y_min == y_max {
            y_min -= 0.5;
            y_max += 0.5;
        }
        Region::new(x_min, y_min, x_max, y_max)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn shorter_side(&self) -> f64 {
        self.width().min(self.height())
    }

    /// Boundary-inclusive containment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// Strength of the segregation alternative: class 1 uniform on
/// (0, 1-s)^2 and class 2 uniform on (s, 1)^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegParams {
    s: f64,
}

impl SegParams {
    pub fn new(s: f64) -> Result<SegParams> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::ParamRange {
                name: "s",
                value: s,
                range: "(0, 1)",
            });
        }
        Ok(SegParams { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Strength of the association alternative: each class 2 point is a uniform
/// class 1 parent displaced by radius U(0, r) and angle U(0, 2*pi).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssocParams {
    r: f64,
}

impl AssocParams {
    pub fn new(r: f64) -> Result<AssocParams> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::ParamRange {
                name: "r",
                value: r,
                range: "(0, 1)",
            });
        }
        Ok(AssocParams { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// A two-class marked point pattern on a rectangular region.
///
/// Immutable after construction; all invariants (equal lengths, containment)
/// are checked by [`MarkedPattern::new`].
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedPattern {
    points: Vec<(f64, f64)>,
    labels: Vec<Class>,
    region: Region,
}

impl MarkedPattern {
    pub fn new(points: Vec<(f64, f64)>, labels: Vec<Class>, region: Region) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                labels: labels.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &(x, y) in &points {
            if !x.is_finite() || !y.is_finite() || !region.contains(x, y) {
                return Err(Error::PointOutsideRegion { x, y });
            }
        }
        Ok(MarkedPattern {
            points,
            labels,
            region,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn class_size(&self, class: Class) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    pub fn n1(&self) -> usize {
        self.class_size(Class::One)
    }

    pub fn n2(&self) -> usize {
        self.class_size(Class::Two)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Indices of the points belonging to `class`.
    pub fn class_indices(&self, class: Class) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn require_both_classes(&self) -> Result<()> {
        for class in Class::BOTH {
            if self.class_size(class) == 0 {
                return Err(Error::EmptyClass(class.label()));
            }
        }
        Ok(())
    }
}

fn check_sizes(n1: usize, n2: usize) -> Result<()> {
    if n1 == 0 {
        return Err(Error::EmptyClass(1));
    }
    if n2 == 0 {
        return Err(Error::EmptyClass(2));
    }
    Ok(())
}

/// CSR independence: both classes iid uniform over `region`, class 1 stored
/// first.
pub fn gen_csr(n1: usize, n2: usize, region: Region, seed: u64) -> Result<MarkedPattern> {
    gen_csr_with(n1, n2, region, &mut seeded_rng(seed))
}

pub fn gen_csr_with<R: Rng>(n1: usize, n2: usize, region: Region, rng: &mut R) -> Result<MarkedPattern> {
    check_sizes(n1, n2)?;
    let n = n1 + n2;
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let x = rng.random_range(region.x_min..region.x_max);
        let y = rng.random_range(region.y_min..region.y_max);
        points.push((x, y));
        labels.push(if i < n1 { Class::One } else { Class::Two });
    }
    MarkedPattern::new(points, labels, region)
}

/// Segregation alternative on the unit square: class 1 uniform on
/// (0, 1-s)^2, class 2 uniform on (s, 1)^2.
pub fn gen_segregation(n1: usize, n2: usize, params: SegParams, seed: u64) -> Result<MarkedPattern> {
    gen_segregation_with(n1, n2, params, &mut seeded_rng(seed))
}

pub fn gen_segregation_with<R: Rng>(
    n1: usize,
    n2: usize,
    params: SegParams,
    rng: &mut R,
) -> Result<MarkedPattern> {
    check_sizes(n1, n2)?;
    let s = params.s();
    let mut points = Vec::with_capacity(n1 + n2);
    let mut labels = Vec::with_capacity(n1 + n2);
    for _ in 0..n1 {
        let x = rng.random_range(0.0..1.0 - s);
        let y = rng.random_range(0.0..1.0 - s);
        points.push((x, y));
        labels.push(Class::One);
    }
    for _ in 0..n2 {
        let x = rng.random_range(s..1.0);
        let y = rng.random_range(s..1.0);
        points.push((x, y));
        labels.push(Class::Two);
    }
    MarkedPattern::new(points, labels, Region::unit_square())
}

/// Association alternative: class 1 uniform on the unit square; each class 2
/// point is a uniformly chosen class 1 parent plus a displacement of radius
/// U(0, r) and angle U(0, 2*pi). Offspring are not clipped, so the recorded
/// region is the bounding box of all points.
pub fn gen_association(n1: usize, n2: usize, params: AssocParams, seed: u64) -> Result<MarkedPattern> {
    gen_association_with(n1, n2, params, &mut seeded_rng(seed))
}

pub fn gen_association_with<R: Rng>(
    n1: usize,
    n2: usize,
    params: AssocParams,
    rng: &mut R,
) -> Result<MarkedPattern> {
    check_sizes(n1, n2)?;
    let r = params.r();
    let mut points = Vec::with_capacity(n1 + n2);
    let mut labels = Vec::with_capacity(n1 + n2);
    for _ in 0..n1 {
        let x = rng.random_range(0.0..1.0);
        let y = rng.random_range(0.0..1.0);
        points.push((x, y));
        labels.push(Class::One);
    }
    for _ in 0..n2 {
        let parent = points[rng.random_range(0..n1)];
        let radius = rng.random_range(0.0..r);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        points.push((parent.0 + radius * angle.cos(), parent.1 + radius * angle.sin()));
        labels.push(Class::Two);
    }
    let region = Region::bounding_box(&points)?;
    MarkedPattern::new(points, labels, region)
}

/// Random labeling: identical locations, labels uniformly permuted.
pub fn relabel(pattern: &MarkedPattern, seed: u64) -> MarkedPattern {
    relabel_with(pattern, &mut seeded_rng(seed))
}

pub fn relabel_with<R: Rng>(pattern: &MarkedPattern, rng: &mut R) -> MarkedPattern {
    let mut labels = pattern.labels.clone();
    labels.shuffle(rng);
    MarkedPattern {
        points: pattern.points.clone(),
        labels,
        region: pattern.region,
    }
}

/// Result of reading a pattern file: the pattern plus the original label
/// text mapped to classes 1 and 2 (in order of first appearance).
#[derive(Clone, Debug)]
pub struct NamedPattern {
    pub pattern: MarkedPattern,
    pub class_names: [String; 2],
}

/// Read a pattern from CSV with columns `x,y,label`. The header is optional;
/// labels are `1`/`2` or two distinct strings mapped by first appearance.
/// With no region supplied, the bounding box of the points is used.
pub fn read_pattern(path: &Path, region: Option<Region>) -> Result<MarkedPattern> {
    Ok(read_pattern_named(path, region)?.pattern)
}

pub fn read_pattern_named(path: &Path, region: Option<Region>) -> Result<NamedPattern> {
    let file = std::fs::File::open(path)?;
    parse_pattern(BufReader::new(file), region)
}

pub fn parse_pattern<R: BufRead>(reader: R, region: Option<Region>) -> Result<NamedPattern> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let x: f64 = match fields[0].parse() {
            Ok(v) => v,
            // A non-numeric first row is treated as the optional header.
            Err(_) if points.is_empty() && names.is_empty() => continue,
            Err(_) => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("invalid x coordinate {:?}", fields[0]),
                })
            }
        };
        let y: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid y coordinate {:?}", fields[1]),
        })?;
        let class = parse_label(fields[2], &mut names).ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("invalid label {:?} (expected 1, 2, or one of two class names)", fields[2]),
        })?;
        points.push((x, y));
        labels.push(class);
    }
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let region = match region {
        Some(r) => r,
        None => Region::bounding_box(&points)?,
    };
    let pattern = MarkedPattern::new(points, labels, region)?;
    let mut class_names = [String::from("1"), String::from("2")];
    for (i, name) in names.into_iter().enumerate() {
        class_names[i] = name;
    }
    Ok(NamedPattern {
        pattern,
        class_names,
    })
}

fn parse_label(field: &str, names: &mut Vec<String>) -> Option<Class> {
    // Numeric labels must be exactly 1 or 2; anything else numeric is an
    // error rather than a third class name.
    if let Ok(v) = field.parse::<i64>() {
        return u8::try_from(v).ok().and_then(Class::from_label);
    }
    if let Some(pos) = names.iter().position(|n| n == field) {
        return Class::from_label(pos as u8 + 1);
    }
    if names.len() < 2 {
        names.push(field.to_string());
        return Class::from_label(names.len() as u8);
    }
    None
}

/// Write a pattern as CSV rows `x,y,label` (same format `read_pattern` accepts).
pub fn write_pattern<W: Write>(writer: &mut W, pattern: &MarkedPattern) -> Result<()> {
    for (&(x, y), &label) in pattern.points().iter().zip(pattern.labels()) {
        writeln!(writer, "{},{},{}", x, y, label)?;
    }
    Ok(())
}
