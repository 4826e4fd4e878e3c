//! Per-item rating datasets.
//!
//! Input is a UTF-8 CSV with header `item_id,rating` (one row per rating) or
//! `item_id,rating,count` (pre-aggregated). Ratings live on an inclusive
//! integer scale `[scale_min, scale_max]` and are shifted to 0-based scores
//! before compression. An optional sentinel marks missing ratings, which are
//! skipped and counted.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::distributions::ScorePmf;
use crate::error::{Error, Result};
use crate::harness::{
    errors_for_pmf, validate_k_set, write_summary_csv, ReportFormat, SchemeTag, Tally,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingDataset {
    pub scale_min: i64,
    pub scale_max: i64,
    /// Rating counts per item, indexed by `rating - scale_min`.
    pub items: BTreeMap<String, Vec<u64>>,
    /// Rows skipped because they carried the missing-rating sentinel.
    pub skipped_missing: u64,
    /// Items whose every rating was missing.
    pub dropped_items: Vec<String>,
}

impl RatingDataset {
    pub fn new(scale_min: i64, scale_max: i64) -> Result<Self> {
        if scale_min >= scale_max {
            return Err(Error::invalid(format!(
                "scale {scale_min}:{scale_max} needs min < max"
            )));
        }
        Ok(Self {
            scale_min,
            scale_max,
            items: BTreeMap::new(),
            skipped_missing: 0,
            dropped_items: Vec::new(),
        })
    }

    /// Number of score levels, `scale_max - scale_min + 1`.
    pub fn levels(&self) -> usize {
        (self.scale_max - self.scale_min + 1) as usize
    }

    pub fn total_ratings(&self) -> u64 {
        self.items.values().flatten().sum()
    }

    /// Adds `count` ratings of `rating` to `item`.
    pub fn add(&mut self, item: &str, rating: i64, count: u64) -> Result<()> {
        if rating < self.scale_min || rating > self.scale_max {
            return Err(Error::invalid(format!(
                "rating {rating} outside scale {}:{}",
                self.scale_min, self.scale_max
            )));
        }
        let levels = self.levels();
        let histogram = self
            .items
            .entry(item.to_string())
            .or_insert_with(|| vec![0; levels]);
        histogram[(rating - self.scale_min) as usize] += count;
        Ok(())
    }
}

fn parse_rating(field: &str) -> Option<f64> {
    let value: f64 = field.trim().parse().ok()?;
    value.is_finite().then_some(value)
}

pub fn parse_ratings_csv<R: Read>(
    stream: R,
    scale_min: i64,
    scale_max: i64,
    missing_sentinel: Option<i64>,
) -> Result<RatingDataset> {
    let mut dataset = RatingDataset::new(scale_min, scale_max)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(stream);

    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let with_count = match header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["item_id", "rating"] => false,
        ["item_id", "rating", "count"] => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header `item_id,rating` or `item_id,rating,count`, got `{}`",
                    header.join(",")
                ),
            })
        }
    };
    let width = header.len();

    // Items that appeared only with missing ratings.
    let mut seen_missing: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        if record.len() != width {
            return Err(parse_err(format!(
                "expected {width} fields, found {}",
                record.len()
            )));
        }
        let item = record[0].trim();
        if item.is_empty() {
            return Err(parse_err("empty item_id".to_string()));
        }
        let rating = parse_rating(&record[1])
            .ok_or_else(|| parse_err(format!("rating `{}` is not a number", &record[1])))?;
        let count = if with_count {
            record[2].trim().parse::<u64>().map_err(|_| {
                parse_err(format!(
                    "count `{}` is not a non-negative integer",
                    &record[2]
                ))
            })?
        } else {
            1
        };
        if missing_sentinel.is_some_and(|m| rating == m as f64) {
            dataset.skipped_missing += count;
            if !dataset.items.contains_key(item) && !seen_missing.iter().any(|s| s == item) {
                seen_missing.push(item.to_string());
            }
            continue;
        }
        if rating.fract() != 0.0 {
            return Err(parse_err(format!(
                "rating {rating} is not an integer level"
            )));
        }
        let rating = rating as i64;
        if rating < scale_min || rating > scale_max {
            return Err(parse_err(format!(
                "rating {rating} outside scale {scale_min}:{scale_max}"
            )));
        }
        dataset
            .add(item, rating, count)
            .map_err(|e| parse_err(e.to_string()))?;
    }

    // Zero-count rows can leave an empty histogram behind.
    let empty: Vec<String> = dataset
        .items
        .iter()
        .filter(|(_, h)| h.iter().all(|c| *c == 0))
        .map(|(id, _)| id.clone())
        .collect();
    for id in empty {
        dataset.items.remove(&id);
        seen_missing.push(id);
    }
    seen_missing.retain(|id| !dataset.items.contains_key(id));
    seen_missing.sort();
    seen_missing.dedup();
    dataset.dropped_items = seen_missing;
    Ok(dataset)
}

pub fn item_pmf(dataset: &RatingDataset, item: &str) -> Result<ScorePmf> {
    let histogram = dataset
        .items
        .get(item)
        .ok_or_else(|| Error::NotFound(format!("item `{item}`")))?;
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return Err(Error::invalid(format!("item `{item}` has no ratings")));
    }
    ScorePmf::new(histogram.iter().map(|c| *c as f64 / total as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemDetail {
    pub item_id: String,
    pub k: usize,
    pub error: f64,
    pub winner: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub scale_min: i64,
    pub scale_max: i64,
    pub k_set: Vec<usize>,
    pub scheme: SchemeTag,
    pub items_analyzed: u64,
    pub per_k_victories: BTreeMap<usize, u64>,
    pub per_k_avg_error: BTreeMap<usize, f64>,
    pub skipped_missing: u64,
    pub dropped_items: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<ItemDetail>,
}

pub fn analyze_dataset(
    dataset: &RatingDataset,
    k_set: &[usize],
    scheme: SchemeTag,
) -> Result<DatasetReport> {
    validate_k_set(k_set, dataset.levels())?;
    let no_clamp = BTreeMap::new();
    let mut tally = Tally::new(k_set.len());
    let mut details = Vec::with_capacity(dataset.items.len() * k_set.len());
    for item in dataset.items.keys() {
        let pmf = item_pmf(dataset, item)?;
        let errors = errors_for_pmf(&pmf, k_set, scheme, &no_clamp)?;
        let winner = tally.record(&errors)?;
        details.extend(
            k_set
                .iter()
                .zip(&errors)
                .enumerate()
                .map(|(i, (k, e))| ItemDetail {
                    item_id: item.clone(),
                    k: *k,
                    error: *e,
                    winner: i == winner,
                }),
        );
    }
    let (per_k_victories, per_k_avg_error) = tally.summarize(k_set);
    Ok(DatasetReport {
        scale_min: dataset.scale_min,
        scale_max: dataset.scale_max,
        k_set: k_set.to_vec(),
        scheme,
        items_analyzed: tally.count,
        per_k_victories,
        per_k_avg_error,
        skipped_missing: dataset.skipped_missing,
        dropped_items: dataset.dropped_items.clone(),
        details,
    })
}

/// Summary in the experiment report formats. JSON omits per-item details
/// unless `with_details` is set.
pub fn write_dataset_report<W: Write + ?Sized>(
    report: &DatasetReport,
    format: ReportFormat,
    with_details: bool,
    sink: &mut W,
) -> Result<()> {
    match format {
        ReportFormat::Csv => write_summary_csv(
            &report.per_k_victories,
            &report.per_k_avg_error,
            report.items_analyzed,
            sink,
        ),
        ReportFormat::Json => {
            if with_details {
                serde_json::to_writer_pretty(&mut *sink, report)?;
            } else {
                let summary = DatasetReport {
                    details: Vec::new(),
                    ..report.clone()
                };
                serde_json::to_writer_pretty(&mut *sink, &summary)?;
            }
            writeln!(sink)?;
            Ok(())
        }
    }
}

/// Per-item rows `item_id,k,error,winner_flag`.
pub fn write_item_details<W: Write>(report: &DatasetReport, sink: &mut W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["item_id", "k", "error", "winner_flag"])?;
    for d in &report.details {
        writer.write_record([
            d.item_id.as_str(),
            &d.k.to_string(),
            &crate::fmt::sig6(d.error),
            if d.winner { "1" } else { "0" },
        ])?;
    }
    writer.flush()?;
    Ok(())
}
