//! Per-segment quality/size tables and data budgets.
//!
//! An instance is a rectangular table: N segments, each offering the same
//! number M of quality variants. Each variant has a human label (`"720p"`),
//! a perceptual quality score (VMAF, 0..=100) and a download size in MB.
//! Tables load and save as CSV (`segment,label,vmaf,data_mb`, segments
//! numbered from 1) or as JSON (`{"segments":[{"variants":[..]},..]}`).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One encode of one segment: label, quality score, and size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityVariant {
    pub label: String,
    pub vmaf: f64,
    pub data_mb: f64,
}

/// The variants offered for a single segment, in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub variants: Vec<QualityVariant>,
}

/// A validated N-segment, M-level instance.
///
/// Invariants enforced at construction: at least one segment, every segment
/// has the same nonzero number of variants, labels are unique within a
/// segment, `0 <= vmaf <= 100`, and `data_mb > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct SegmentTable {
    segments: Vec<Segment>,
}

/// Serde-facing mirror of [`SegmentTable`] without the validation.
#[derive(Serialize, Deserialize)]
struct RawTable {
    segments: Vec<Segment>,
}

impl TryFrom<RawTable> for SegmentTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        SegmentTable::new(raw.segments)
    }
}

impl From<SegmentTable> for RawTable {
    fn from(t: SegmentTable) -> RawTable {
        RawTable { segments: t.segments }
    }
}

impl SegmentTable {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::BadTable("table has no segments".into()));
        }
        let m = segments[0].variants.len();
        if m == 0 {
            return Err(Error::BadTable("segment 1 has no quality variants".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.variants.len() != m {
                return Err(Error::NonRectangular {
                    segment: i + 1,
                    expected: m,
                    found: seg.variants.len(),
                });
            }
            for (j, var) in seg.variants.iter().enumerate() {
                if !(0.0..=100.0).contains(&var.vmaf) || !var.vmaf.is_finite() {
                    return Err(Error::BadVariant {
                        segment: i + 1,
                        level: j + 1,
                        message: format!("vmaf {} outside 0..=100", var.vmaf),
                    });
                }
                if !(var.data_mb > 0.0) || !var.data_mb.is_finite() {
                    return Err(Error::BadVariant {
                        segment: i + 1,
                        level: j + 1,
                        message: format!("data_mb {} must be positive", var.data_mb),
                    });
                }
                if var.label.is_empty() {
                    return Err(Error::BadVariant {
                        segment: i + 1,
                        level: j + 1,
                        message: "empty label".into(),
                    });
                }
                if seg.variants[..j].iter().any(|o| o.label == var.label) {
                    return Err(Error::BadVariant {
                        segment: i + 1,
                        level: j + 1,
                        message: format!("duplicate label \"{}\"", var.label),
                    });
                }
            }
        }
        Ok(SegmentTable { segments })
    }

    /// Number of segments (N).
    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    /// Number of quality levels per segment (M).
    pub fn num_levels(&self) -> usize {
        self.segments[0].variants.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn variant(&self, segment: usize, level: usize) -> &QualityVariant {
        &self.segments[segment].variants[level]
    }

    /// Largest VMAF in the table; penalty weights default to twice this.
    pub fn max_vmaf(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| &s.variants)
            .map(|v| v.vmaf)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cheapest possible total usage: one minimum-size variant per segment.
    pub fn min_total_data(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.variants.iter().map(|v| v.data_mb).fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Priciest possible total usage: one maximum-size variant per segment.
    pub fn max_total_data(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.variants.iter().map(|v| v.data_mb).fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }
}

/// Total download budget plus the quantization step used by the integer
/// oracles and the slack encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataBudget {
    pub d_max_mb: f64,
    pub unit_mb: f64,
}

pub const DEFAULT_UNIT_MB: f64 = 0.01;

impl DataBudget {
    pub fn new(d_max_mb: f64, unit_mb: f64) -> Result<Self> {
        if !(d_max_mb > 0.0) || !d_max_mb.is_finite() {
            return Err(Error::BadBudget(format!("d_max_mb {d_max_mb} must be positive")));
        }
        if !(unit_mb > 0.0) || !unit_mb.is_finite() {
            return Err(Error::BadBudget(format!("unit_mb {unit_mb} must be positive")));
        }
        Ok(DataBudget { d_max_mb, unit_mb })
    }

    /// Budget with the default 0.01 MB quantization step.
    pub fn with_default_unit(d_max_mb: f64) -> Result<Self> {
        Self::new(d_max_mb, DEFAULT_UNIT_MB)
    }

    /// Nearest-integer number of quantization units in `mb`.
    pub fn units(&self, mb: f64) -> u64 {
        (mb / self.unit_mb).round().max(0.0) as u64
    }

    /// Whole quantization units that fit inside the budget; errors when the
    /// budget is below one unit.
    ///
    /// A cap that lands within 1e-6 units of an integer snaps to it (so a
    /// budget meant as an exact multiple of the unit survives the floating
    /// point division), and anything else is truncated downward: a fractional
    /// budget admits only the units fully contained in it. Flooring rather
    /// than rounding keeps this consistent with the exact search over real
    /// megabyte totals — a selection whose exact total exceeds the cap can
    /// never become feasible merely by unit quantization.
    pub fn max_units(&self) -> Result<u64> {
        let raw = self.d_max_mb / self.unit_mb;
        let nearest = raw.round();
        let u = if (raw - nearest).abs() < 1e-6 {
            nearest.max(0.0) as u64
        } else {
            raw.floor().max(0.0) as u64
        };
        if u < 1 {
            return Err(Error::BadBudget(format!(
                "budget {} MB is below the quantization unit {} MB",
                self.d_max_mb, self.unit_mb
            )));
        }
        Ok(u)
    }
}

/// The two-segment, four-level table used throughout the built-in examples
/// and the acceptance checks.
pub fn reference_instance() -> SegmentTable {
    let seg = |rows: &[(&str, f64, f64)]| Segment {
        variants: rows
            .iter()
            .map(|&(label, vmaf, data_mb)| QualityVariant {
                label: label.to_string(),
                vmaf,
                data_mb,
            })
            .collect(),
    };
    SegmentTable::new(vec![
        seg(&[
            ("1080p", 92.90, 8.17),
            ("720p", 90.58, 5.46),
            ("480p", 87.13, 2.68),
            ("360p", 84.65, 0.96),
        ]),
        seg(&[
            ("1080p", 95.69, 12.09),
            ("720p", 94.96, 7.76),
            ("480p", 93.14, 4.06),
            ("360p", 89.03, 1.63),
        ]),
    ])
    .expect("reference table is valid")
}

// Descending bitrate tiers in kbps; synthetic tables interpolate between the
// top and bottom tier geometrically.
const TIER_TOP_KBPS: f64 = 8000.0;
const TIER_BOTTOM_KBPS: f64 = 1000.0;
const TIER_LABELS: [&str; 9] = [
    "4320p", "2160p", "1440p", "1080p", "720p", "480p", "360p", "240p", "144p",
];

fn tier_label(level: usize, num_levels: usize) -> String {
    if num_levels <= 6 {
        TIER_LABELS[3 + level].to_string()
    } else if num_levels <= TIER_LABELS.len() {
        TIER_LABELS[level].to_string()
    } else {
        format!("q{}", level + 1)
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Deterministic synthetic instance: `n` segments with `m` levels each,
/// sizes following the bitrate tiers above, and VMAF strictly increasing
/// with size within every segment. Equal seeds give equal tables.
pub fn synth_instance(n: usize, m: usize, seed: u64) -> Result<SegmentTable> {
    if n == 0 || m == 0 {
        return Err(Error::BadTable(format!("synthetic table needs n >= 1 and m >= 1, got {n}x{m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments = Vec::with_capacity(n);
    for _ in 0..n {
        let duration_s: f64 = rng.gen_range(3.0..8.0);
        // Build from the cheapest tier up so both series are ascending, then
        // store top-first to match the usual ladder ordering.
        let mut data = Vec::with_capacity(m);
        for level in (0..m).rev() {
            let frac = if m == 1 { 1.0 } else { level as f64 / (m - 1) as f64 };
            // frac 0 => top tier, 1 => bottom tier.
            let kbps = TIER_TOP_KBPS * (TIER_BOTTOM_KBPS / TIER_TOP_KBPS).powf(frac);
            let jitter: f64 = rng.gen_range(0.85..1.25);
            let mut mb = round2(kbps * duration_s / 8000.0 * jitter).max(0.01);
            if let Some(&prev) = data.last() {
                // Keep sizes strictly increasing after rounding.
                mb = mb.max(round2(prev + 0.01));
            }
            data.push(mb);
        }
        let top_vmaf: f64 = rng.gen_range(88.0..97.0);
        let mut vmaf_desc = vec![round2(top_vmaf)];
        for _ in 1..m {
            let step: f64 = rng.gen_range(0.5..4.5);
            let next = round2((vmaf_desc.last().unwrap() - step).max(1.0));
            // A deep ladder can hit the floor; keep scores strictly decreasing.
            let next = next.min(round2(vmaf_desc.last().unwrap() - 0.01));
            vmaf_desc.push(next.max(0.0));
        }
        let variants = (0..m)
            .map(|level| QualityVariant {
                label: tier_label(level, m),
                vmaf: vmaf_desc[level],
                data_mb: data[m - 1 - level],
            })
            .collect();
        segments.push(Segment { variants });
    }
    SegmentTable::new(segments)
}

/// On-disk formats for tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    /// Guess from a file extension; defaults to CSV.
    pub fn from_path(path: &Path) -> TableFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => TableFormat::Json,
            _ => TableFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    segment: usize,
    label: String,
    vmaf: f64,
    data_mb: f64,
}

pub fn load_table(path: &Path, format: TableFormat) -> Result<SegmentTable> {
    match format {
        TableFormat::Json => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                row: e.line(),
                message: e.to_string(),
            })
        }
        TableFormat::Csv => {
            let mut reader = csv::Reader::from_path(path)?;
            let mut segments: Vec<Segment> = Vec::new();
            for (idx, record) in reader.deserialize::<CsvRow>().enumerate() {
                let line = idx + 2; // header is line 1
                let row = record.map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    row: line,
                    message: e.to_string(),
                })?;
                if row.segment == segments.len() + 1 {
                    segments.push(Segment { variants: Vec::new() });
                } else if row.segment != segments.len() {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        row: line,
                        message: format!(
                            "segment numbers must be contiguous from 1; got {} after {}",
                            row.segment,
                            segments.len()
                        ),
                    });
                }
                segments.last_mut().unwrap().variants.push(QualityVariant {
                    label: row.label,
                    vmaf: row.vmaf,
                    data_mb: row.data_mb,
                });
            }
            if segments.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: 0,
                    message: "no data rows".into(),
                });
            }
            SegmentTable::new(segments)
        }
    }
}

pub fn save_table(table: &SegmentTable, path: &Path, format: TableFormat) -> Result<()> {
    match format {
        TableFormat::Json => {
            let mut text = serde_json::to_string_pretty(table)?;
            text.push('\n');
            std::fs::write(path, text)?;
        }
        TableFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)?;
            for (i, seg) in table.segments().iter().enumerate() {
                for var in &seg.variants {
                    writer.serialize(CsvRow {
                        segment: i + 1,
                        label: var.label.clone(),
                        vmaf: var.vmaf,
                        data_mb: var.data_mb,
                    })?;
                }
            }
            writer.flush()?;
        }
    }
    Ok(())
}
