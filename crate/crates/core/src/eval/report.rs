use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::aggregate::{LanguageReport, ALL};
use super::scorer::MOS_RANGE;
use crate::error::{Error, Result};

/// One table row: a model's geometry plus its per-language reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: String,
    pub codebook_size: usize,
    pub nq: usize,
    pub rate_hz: u32,
    pub reports: Vec<LanguageReport>,
}

impl ModelSummary {
    fn mean(&self, language: &str) -> Option<f64> {
        self.reports.iter().find(|r| r.language == language).map(|r| r.mean_mos)
    }
}

fn canonical(models: &[ModelSummary]) -> Result<(Vec<&ModelSummary>, Vec<String>)> {
    if models.is_empty() {
        return Err(Error::EmptyInput("no models to report".into()));
    }
    let mut sorted: Vec<&ModelSummary> = models.iter().collect();
    sorted.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].model_id == w[1].model_id) {
        return Err(Error::Config(format!("model `{}` reported twice", w[0].model_id)));
    }
    let languages: BTreeSet<&str> = models
        .iter()
        .flat_map(|m| m.reports.iter().map(|r| r.language.as_str()))
        .filter(|l| *l != ALL)
        .collect();
    let mut columns: Vec<String> = languages.into_iter().map(String::from).collect();
    if models.iter().any(|m| m.mean(ALL).is_some()) {
        columns.push(ALL.to_string());
    }
    if columns.is_empty() {
        return Err(Error::EmptyInput("no language reports".into()));
    }
    Ok((sorted, columns))
}

/// Tab-separated table: model, codebook, nq, rate_hz, then one mean-MOS
/// column per language (sorted, `ALL` last). Missing cells stay blank.
pub fn render_table(models: &[ModelSummary]) -> Result<String> {
    let (rows, columns) = canonical(models)?;
    let mut out = String::from("# mean MOS per language; per-clip scores and population std in the sidecar\n");
    out.push_str("model\tcodebook\tnq\trate_hz");
    for c in &columns {
        write!(out, "\t{c}").expect("string write");
    }
    out.push('\n');
    for m in rows {
        write!(out, "{}\t{}\t{}\t{}", m.model_id, m.codebook_size, m.nq, m.rate_hz).expect("string write");
        for c in &columns {
            match m.mean(c) {
                Some(v) => write!(out, "\t{v:.3}"),
                None => write!(out, "\t"),
            }
            .expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

const BAR_WIDTH: u32 = 40;
const GAP: u32 = 20;
const PLOT_HEIGHT: u32 = 200;
const MARGIN: u32 = 20;
const BAR_COLOURS: [[u8; 3]; 6] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
];

/// Bar chart of each model's `ALL` mean on a 1-5 MOS axis, models in table
/// order, with a light grid line at every integer score.
pub fn render_figure(models: &[ModelSummary]) -> Result<RgbImage> {
    let (rows, _) = canonical(models)?;
    let n = rows.len() as u32;
    let width = 2 * MARGIN + n * BAR_WIDTH + (n - 1) * GAP;
    let height = 2 * MARGIN + PLOT_HEIGHT;
    let mut img = RgbImage::from_pixel(width, height, Rgb([255, 255, 255]));
    let (lo, hi) = MOS_RANGE;
    let y_of = |mos: f64| -> u32 {
        let t = ((mos - lo) / (hi - lo)).clamp(0.0, 1.0);
        MARGIN + PLOT_HEIGHT - (t * PLOT_HEIGHT as f64).round() as u32
    };
    for score in (lo as u32)..=(hi as u32) {
        let y = y_of(score as f64);
        for x in MARGIN / 2..width - MARGIN / 2 {
            img.put_pixel(x, y, Rgb([220, 220, 220]));
        }
    }
    for (i, m) in rows.iter().enumerate() {
        let Some(mean) = m.mean(ALL) else { continue };
        let x0 = MARGIN + i as u32 * (BAR_WIDTH + GAP);
        let colour = Rgb(BAR_COLOURS[i % BAR_COLOURS.len()]);
        for y in y_of(mean)..=y_of(lo) {
            for x in x0..x0 + BAR_WIDTH {
                img.put_pixel(x, y, colour);
            }
        }
    }
    let axis = y_of(lo);
    for x in MARGIN / 2..width - MARGIN / 2 {
        img.put_pixel(x, axis, Rgb([0, 0, 0]));
    }
    Ok(img)
}

/// Writes the table and the PNG figure.
pub fn render_report(models: &[ModelSummary], table: &Path, figure: &Path) -> Result<()> {
    let text = render_table(models)?;
    let img = render_figure(models)?;
    std::fs::write(table, text)?;
    img.save_with_format(figure, ImageFormat::Png)?;
    Ok(())
}
