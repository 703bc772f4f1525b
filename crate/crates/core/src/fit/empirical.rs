//! Empirical distributions: raw samples, tabulated CDF points or tabulated
//! PDF points, plus CSV ingestion.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalKind {
    Samples,
    CdfPoints,
    PdfPoints,
}

/// Sorted (x, value) table. For samples the values are the step CDF k/n at
/// the distinct order statistics.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalDistribution {
    kind: EmpiricalKind,
    points: Vec<(f64, f64)>,
    sample_count: Option<usize>,
    sample_mean: Option<f64>,
    metadata: BTreeMap<String, String>,
    #[serde(skip)]
    samples: Vec<f64>,
}

fn degenerate(msg: impl Into<String>) -> Error {
    Error::Degenerate(msg.into())
}

impl EmpiricalDistribution {
    /// Step-function CDF of `samples`; ties collapse onto the largest rank.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(degenerate(format!("need at least 2 samples, got {}", samples.len())));
        }
        if let Some(bad) = samples.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("samples must be finite and > 0, found {bad}")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted[0] == sorted[sorted.len() - 1] {
            return Err(degenerate("all samples are identical; the CDF is a single step"));
        }
        let n = sorted.len();
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(n);
        for (i, &x) in sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n as f64;
            match points.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => points.push((x, f)),
            }
        }
        let mean = sorted.iter().sum::<f64>() / n as f64;
        Ok(Self {
            kind: EmpiricalKind::Samples,
            points,
            sample_count: Some(n),
            sample_mean: Some(mean),
            metadata: BTreeMap::new(),
            samples: sorted,
        })
    }

    pub fn from_cdf_points(points: Vec<(f64, f64)>) -> Result<Self> {
        check_abscissae(&points)?;
        for w in points.windows(2) {
            if w[1].1 < w[0].1 {
                return Err(Error::Domain(format!("cdf decreases between x = {} and x = {}", w[0].0, w[1].0)));
            }
        }
        if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(&p.1)) {
            return Err(Error::Domain(format!("cdf value {} at x = {} outside [0, 1]", p.1, p.0)));
        }
        Ok(Self::table(EmpiricalKind::CdfPoints, points))
    }

    pub fn from_pdf_points(points: Vec<(f64, f64)>) -> Result<Self> {
        check_abscissae(&points)?;
        if let Some(p) = points.iter().find(|p| !(p.1 >= 0.0 && p.1.is_finite())) {
            return Err(Error::Domain(format!("pdf value {} at x = {} must be finite and >= 0", p.1, p.0)));
        }
        if points.iter().all(|p| p.1 == 0.0) {
            return Err(degenerate("pdf is identically zero"));
        }
        Ok(Self::table(EmpiricalKind::PdfPoints, points))
    }

    fn table(kind: EmpiricalKind, points: Vec<(f64, f64)>) -> Self {
        Self { kind, points, sample_count: None, sample_mean: None, metadata: BTreeMap::new(), samples: Vec::new() }
    }

    pub fn kind(&self) -> EmpiricalKind {
        self.kind
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn sample_count(&self) -> Option<usize> {
        self.sample_count
    }

    pub fn sample_mean(&self) -> Option<f64> {
        self.sample_mean
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Smallest empirical CDF value that enters the log-error: 1/n for
    /// samples, the smallest positive tabulated value for CDF points.
    pub fn admissible_floor(&self) -> Result<f64> {
        match self.kind {
            EmpiricalKind::Samples => Ok(1.0 / self.sample_count.unwrap_or(1) as f64),
            EmpiricalKind::CdfPoints => self
                .points
                .iter()
                .map(|p| p.1)
                .filter(|v| *v > 0.0)
                .min_by(f64::total_cmp)
                .ok_or_else(|| Error::NoAdmissiblePoints("no positive cdf value".into())),
            EmpiricalKind::PdfPoints => Err(Error::NoAdmissiblePoints("pdf tables have no cdf floor".into())),
        }
    }

    /// CDF points with F̃ ≥ the admissible floor.
    pub fn admissible_points(&self) -> Result<Vec<(f64, f64)>> {
        self.points_above(self.admissible_floor()?)
    }

    /// CDF points with F̃ ≥ `floor`; `floor` is raised to the admissible
    /// floor when it lies below it.
    pub fn points_above(&self, floor: f64) -> Result<Vec<(f64, f64)>> {
        let floor = floor.max(self.admissible_floor()?);
        let pts: Vec<(f64, f64)> = self.points.iter().copied().filter(|p| p.1 >= floor).collect();
        if pts.is_empty() {
            return Err(Error::NoAdmissiblePoints(format!("no cdf value >= {floor}")));
        }
        Ok(pts)
    }

    /// At most `max_points` admissible CDF points, spaced evenly in
    /// log F̃ and always keeping both ends.
    pub fn thinned_points(&self, max_points: usize) -> Result<Vec<(f64, f64)>> {
        self.thinned_points_above(self.admissible_floor()?, max_points)
    }

    /// [`Self::thinned_points`] restricted to F̃ ≥ `floor`.
    pub fn thinned_points_above(&self, floor: f64, max_points: usize) -> Result<Vec<(f64, f64)>> {
        let pts = self.points_above(floor)?;
        if pts.len() <= max_points || max_points < 2 {
            return Ok(pts);
        }
        let lo = pts[0].1.ln();
        let hi = pts[pts.len() - 1].1.ln();
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(max_points);
        for i in 0..max_points {
            let target = if i + 1 == max_points { hi } else { lo + (hi - lo) * i as f64 / (max_points - 1) as f64 };
            // first point whose F̃ reaches the target level
            let idx = pts.partition_point(|p| p.1.ln() < target - 1e-12).min(pts.len() - 1);
            if out.last().map_or(true, |last| last.0 < pts[idx].0) {
                out.push(pts[idx]);
            }
        }
        Ok(out)
    }

    /// Histogram density of the samples with the Freedman–Diaconis bin
    /// width; the rule and bin count are recorded in the metadata.
    pub fn histogram_pdf(&self) -> Result<Self> {
        if self.kind != EmpiricalKind::Samples {
            return Err(Error::InvalidParameter("histogram needs raw samples".into()));
        }
        let s = &self.samples;
        let n = s.len();
        let q = |p: f64| s[((n - 1) as f64 * p).round() as usize];
        let iqr = q(0.75) - q(0.25);
        let (lo, hi) = (s[0], s[n - 1]);
        let width = if iqr > 0.0 { 2.0 * iqr / (n as f64).cbrt() } else { (hi - lo) / (n as f64).sqrt() };
        let bins = (((hi - lo) / width).ceil() as usize).clamp(1, 10_000);
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in s {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let points = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (lo + (i as f64 + 0.5) * width, c as f64 / (n as f64 * width)))
            .collect();
        let mut out = Self::from_pdf_points(points)?;
        out.metadata.insert("bin_rule".into(), "freedman-diaconis".into());
        out.metadata.insert("bins".into(), bins.to_string());
        out.sample_count = Some(n);
        Ok(out)
    }

    /// Parses a CSV table. The header decides the kind: `x,cdf`, `x,pdf` or
    /// `sample`; alternatively a `# kind=cdf|pdf` line followed by `x,value`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut text = String::new();
        let mut reader = reader;
        reader.read_to_string(&mut text)?;
        let mut declared: Option<String> = None;
        let mut body_start = 0;
        let mut first_line = 1;
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some(kind) = rest.trim().strip_prefix("kind=") {
                    declared = Some(kind.trim().to_ascii_lowercase());
                }
                body_start += line.len() + 1;
                first_line = i + 2;
            } else if trimmed.is_empty() {
                body_start += line.len() + 1;
                first_line = i + 2;
            } else {
                break;
            }
        }
        let body = text.get(body_start.min(text.len())..).unwrap_or("");
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(body.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| ingest(first_line, e.to_string()))?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        let kind = match (header.iter().map(String::as_str).collect::<Vec<_>>().as_slice(), declared.as_deref()) {
            (["sample"], None) => EmpiricalKind::Samples,
            (["x", "cdf"], None) => EmpiricalKind::CdfPoints,
            (["x", "pdf"], None) => EmpiricalKind::PdfPoints,
            (["x", "value"], Some("cdf")) => EmpiricalKind::CdfPoints,
            (["x", "value"], Some("pdf")) => EmpiricalKind::PdfPoints,
            (["sample"], Some("samples" | "sample")) => EmpiricalKind::Samples,
            _ => {
                return Err(ingest(
                    first_line,
                    format!("unrecognised header {:?} (kind {:?})", header, declared.unwrap_or_default()),
                ))
            }
        };
        let width = header.len();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let line_of = |pos: Option<&csv::Position>| pos.map_or(first_line, |p| first_line + p.line() as usize - 1);
        for record in rdr.records() {
            let record = record.map_err(|e| ingest(line_of(e.position()), e.to_string()))?;
            let line = line_of(record.position());
            if record.len() != width {
                return Err(ingest(line, format!("expected {width} fields, found {}", record.len())));
            }
            let mut row = Vec::with_capacity(width);
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| ingest(line, format!("field {} ({:?}) is not a number", j + 1, field)))?;
                if !v.is_finite() {
                    return Err(ingest(line, format!("field {} is not finite", j + 1)));
                }
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(ingest(first_line, "no data rows"));
        }
        match kind {
            EmpiricalKind::Samples => Self::from_samples(&rows.iter().map(|r| r[0]).collect::<Vec<_>>()),
            EmpiricalKind::CdfPoints => Self::from_cdf_points(rows.iter().map(|r| (r[0], r[1])).collect()),
            EmpiricalKind::PdfPoints => Self::from_pdf_points(rows.iter().map(|r| (r[0], r[1])).collect()),
        }
    }
}

fn ingest(line: usize, msg: impl Into<String>) -> Error {
    Error::Ingest { line, msg: msg.into() }
}

fn check_abscissae(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 2 {
        return Err(degenerate(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.0.is_finite())) {
        return Err(Error::Domain(format!("abscissa {} must be finite and > 0", p.0)));
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Domain(format!("abscissae must be strictly increasing ({} then {})", w[0].0, w[1].0)));
        }
    }
    Ok(())
}

pub fn empirical_from_samples(samples: &[f64]) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::from_samples(samples)
}
