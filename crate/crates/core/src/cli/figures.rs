use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{
    alpha_star, avg_r_net_lower, avg_r_res_lower, beta_star, beta_star_sic, optimal_k, upper_bound_net, worst_r_res,
    SchemeParams, SlotRecursion,
};
use crate::channel::plnc_rate;
use crate::error::{Result, ScraError};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    SinL,
    RresinL,
    AvgperfInK,
    AvgVsWorst,
    RtotalInD,
    OptimalKInD,
    RtotalInDSic,
    TableI,
    TableII,
}

impl FigureName {
    pub const ALL: [FigureName; 9] = [
        FigureName::SinL,
        FigureName::RresinL,
        FigureName::AvgperfInK,
        FigureName::AvgVsWorst,
        FigureName::RtotalInD,
        FigureName::OptimalKInD,
        FigureName::RtotalInDSic,
        FigureName::TableI,
        FigureName::TableII,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::SinL => "SinL",
            FigureName::RresinL => "RresinL",
            FigureName::AvgperfInK => "avgperf_inK",
            FigureName::AvgVsWorst => "avg_vs_worst",
            FigureName::RtotalInD => "Rtotal_inD",
            FigureName::OptimalKInD => "optimalK_inD",
            FigureName::RtotalInDSic => "Rtotal_inD_SIC",
            FigureName::TableI => "tableI",
            FigureName::TableII => "tableII",
        }
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FigureName::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = FigureName::ALL.iter().map(|f| f.as_str()).collect();
            format!("unknown figure '{s}'; valid names: {}", names.join(", "))
        })
    }
}

/// Parameters a figure is drawn with. Unset lists fall back to the
/// defaults of the corresponding figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureParams {
    pub m: u64,
    pub power: f64,
    pub ks: Option<Vec<u32>>,
    pub pms: Option<Vec<f64>>,
    pub ds: Vec<f64>,
    pub l_max: u64,
    /// Range searched for the optimal `K`.
    pub k_star_max: Option<u32>,
}

impl FigureParams {
    pub fn k_star_range(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.k_star_max.unwrap_or((self.m / 2) as u32)
    }
}

/// Log-spaced grid with exact endpoints.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || n == 0 || (n == 1 && hi != lo) {
        return Err(ScraError::argument(format!("bad log grid {lo}:{hi}:{n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .collect())
}

/// Columns of numbers with named headers; column 0 is the x axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Reads back the body produced by [`render`](Self::render), skipping
    /// `#` comment lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| ScraError::integrity("figure output has no header row"))?
            .split(',')
            .map(str::to_owned)
            .collect();
        let rows = lines
            .map(|l| {
                let row = l
                    .split(',')
                    .map(|v| v.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| ScraError::integrity(format!("unreadable figure row '{l}': {e}")))?;
                if row.len() != columns.len() {
                    return Err(ScraError::integrity(format!("row '{l}' has the wrong width")));
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FigureTable { columns, rows })
    }

    fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| ScraError::integrity(format!("missing column {name}")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn fmt_pm(pm: f64) -> String {
    format!("{pm}")
}

pub fn build(name: FigureName, fp: &FigureParams) -> Result<FigureTable> {
    match name {
        FigureName::SinL => slots_in_l(fp, false),
        FigureName::RresinL => slots_in_l(fp, true),
        FigureName::AvgperfInK => avgperf_in_k(fp),
        FigureName::AvgVsWorst => avg_vs_worst(fp),
        FigureName::RtotalInD => rtotal_in_d(fp, false),
        FigureName::OptimalKInD => optimal_k_in_d(fp),
        FigureName::RtotalInDSic => rtotal_in_d(fp, true),
        FigureName::TableI => {
            let ks = fp.ks.clone().unwrap_or(vec![1, 2, 4, 8, 16]);
            Ok(FigureTable {
                columns: vec!["K".into(), "alpha".into(), "beta".into()],
                rows: ks.iter().map(|&k| vec![k as f64, alpha_star(k), beta_star(k)]).collect(),
            })
        }
        FigureName::TableII => {
            let ks = fp.ks.clone().unwrap_or(vec![1, 2, 4, 8]);
            Ok(FigureTable {
                columns: vec!["K".into(), "beta_sic".into()],
                rows: ks.iter().map(|&k| vec![k as f64, beta_star_sic(k)]).collect(),
            })
        }
    }
}

/// `S(L)` (or `L / S(L)`) with its linear bounds, three columns per `K`.
fn slots_in_l(fp: &FigureParams, per_slot: bool) -> Result<FigureTable> {
    let ks = fp.ks.clone().unwrap_or(vec![1, 4, 16]);
    let tag = if per_slot { "Rres" } else { "S" };
    let mut columns = vec!["L".to_string()];
    for k in &ks {
        for part in ["exact", "lower", "upper"] {
            columns.push(format!("{tag}_K{k}_{part}"));
        }
    }
    let mut recursions: Vec<_> = ks.iter().map(|&k| SlotRecursion::new(k, false)).collect();
    let mut rows = Vec::new();
    for l in 1..=fp.l_max {
        let lf = l as f64;
        let mut row = vec![lf];
        for (rec, &k) in recursions.iter_mut().zip(&ks) {
            let s = rec.get(l);
            let (lo, hi) = if l <= k as u64 { (lf, lf) } else { (alpha_star(k) * lf - 1.0, beta_star(k) * lf - 1.0) };
            if per_slot {
                row.extend([lf / s, lf / hi, lf / lo]);
            } else {
                row.extend([s, lo, hi]);
            }
        }
        rows.push(row);
    }
    Ok(FigureTable { columns, rows })
}

fn params_for(fp: &FigureParams, k: u32, pm: f64, d: f64, sic: bool) -> Result<SchemeParams> {
    SchemeParams::with_mean(fp.m, k, pm, fp.power, d, sic)
}

fn avgperf_in_k(fp: &FigureParams) -> Result<FigureTable> {
    let pms = fp.pms.clone().unwrap_or(vec![3.0, 6.0, 12.0]);
    let ks = fp.ks.clone().unwrap_or((1..=64).collect());
    let mut columns = vec!["K".to_string()];
    columns.extend(pms.iter().map(|pm| format!("pM={}", fmt_pm(*pm))));
    let rows = ks
        .iter()
        .map(|&k| {
            let mut row = vec![k as f64];
            for &pm in &pms {
                row.push(avg_r_res_lower(&params_for(fp, k, pm, 1.0, false)?)?);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(FigureTable { columns, rows })
}

fn avg_vs_worst(fp: &FigureParams) -> Result<FigureTable> {
    let pms = fp.pms.clone().unwrap_or((1..=20).map(f64::from).collect());
    let ks = fp.ks.clone().unwrap_or(vec![4, 8, 16]);
    let mut columns = vec!["pM".to_string()];
    for k in &ks {
        columns.push(format!("avg_K{k}"));
        columns.push(format!("worst_K{k}"));
    }
    let rows = pms
        .iter()
        .map(|&pm| {
            let mut row = vec![pm];
            for &k in &ks {
                row.push(avg_r_res_lower(&params_for(fp, k, pm, 1.0, false)?)?);
                row.push(worst_r_res(k, false));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(FigureTable { columns, rows })
}

fn single_pm(fp: &FigureParams) -> Result<f64> {
    match fp.pms.as_deref() {
        None => Ok(3.0),
        Some([pm]) => Ok(*pm),
        Some(_) => Err(ScraError::argument("this figure takes a single pM value")),
    }
}

/// Net-rate lower bound against `D`: fixed-`K` curves, the full-knowledge
/// upper bound, the PLNC limit and the curve at the optimal `K`.
fn rtotal_in_d(fp: &FigureParams, sic: bool) -> Result<FigureTable> {
    let pm = single_pm(fp)?;
    let ks = fp.ks.clone().unwrap_or(vec![4, 8, 16]);
    let suffix = if sic { "_sic" } else { "" };
    let mut columns = vec!["D".to_string()];
    columns.extend(ks.iter().map(|k| format!("K{k}{suffix}")));
    columns.extend(["upper".to_string(), "limit".to_string()]);
    columns.extend([format!("Kstar_value{suffix}"), format!("Kstar{suffix}")]);
    if sic {
        columns.extend(["Kstar_value".to_string(), "Kstar".to_string()]);
    }
    let limit = plnc_rate(fp.power)?;
    let upper = upper_bound_net(&params_for(fp, 1, pm, 1.0, false)?, false)?;
    let rows = fp
        .ds
        .par_iter()
        .map(|&d| {
            let mut row = vec![d];
            for &k in &ks {
                row.push(avg_r_net_lower(&params_for(fp, k, pm, d, sic)?)?);
            }
            row.push(upper);
            row.push(limit);
            let (k_star, v) = optimal_k(&params_for(fp, 1, pm, d, sic)?, fp.k_star_range())?;
            row.push(v);
            row.push(k_star as f64);
            if sic {
                let (k_basic, v_basic) = optimal_k(&params_for(fp, 1, pm, d, false)?, fp.k_star_range())?;
                row.push(v_basic);
                row.push(k_basic as f64);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureTable { columns, rows })
}

fn optimal_k_in_d(fp: &FigureParams) -> Result<FigureTable> {
    let pms = fp.pms.clone().unwrap_or(vec![1.0, 3.0, 6.0, 12.0]);
    let mut columns = vec!["D".to_string()];
    columns.extend(pms.iter().map(|pm| format!("pM={}", fmt_pm(*pm))));
    let rows = fp
        .ds
        .par_iter()
        .map(|&d| {
            let mut row = vec![d];
            for &pm in &pms {
                row.push(optimal_k(&params_for(fp, 1, pm, d, false)?, fp.k_star_range())?.0 as f64);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureTable { columns, rows })
}

fn violation(name: FigureName, what: String) -> ScraError {
    ScraError::integrity(format!("{name}: {what}"))
}

/// Checks the sandwich and ordering properties a figure must satisfy.
pub fn validate(name: FigureName, table: &FigureTable, fp: &FigureParams) -> Result<()> {
    if table.rows.windows(2).any(|w| !(w[0][0] < w[1][0])) {
        return Err(violation(name, "x column is not strictly increasing".into()));
    }
    match name {
        FigureName::SinL | FigureName::RresinL => {
            for row in &table.rows {
                for triple in row[1..].chunks(3) {
                    let (exact, lo, hi) = (triple[0], triple[1], triple[2]);
                    if !(lo <= exact + TOL && exact <= hi + TOL) {
                        return Err(violation(name, format!("L={}: {lo} <= {exact} <= {hi} fails", row[0])));
                    }
                }
            }
        }
        FigureName::AvgperfInK => {
            for c in 1..table.columns.len() {
                let col: Vec<f64> = table.rows.iter().map(|r| r[c]).collect();
                if col.windows(2).any(|w| w[1] + TOL < w[0]) || col.iter().any(|&v| v > 1.0 + TOL) {
                    return Err(violation(name, format!("{} not nondecreasing in K or above 1", table.columns[c])));
                }
            }
        }
        FigureName::AvgVsWorst => {
            for row in &table.rows {
                for pair in row[1..].chunks(2) {
                    if pair[1] > pair[0] + TOL {
                        return Err(violation(name, format!("pM={}: worst case above average", row[0])));
                    }
                }
            }
        }
        FigureName::RtotalInD | FigureName::RtotalInDSic => {
            let sic = name == FigureName::RtotalInDSic;
            let suffix = if sic { "_sic" } else { "" };
            let upper = table.column("upper")?;
            let limit = table.column("limit")?;
            let best = table.column(&format!("Kstar_value{suffix}"))?;
            for (i, row) in table.rows.iter().enumerate() {
                let n_fixed = table.columns.iter().filter(|c| c.starts_with('K') && !c.starts_with("Kstar")).count();
                for &v in &row[1..=n_fixed] {
                    if v > best[i] + TOL || v > limit[i] + TOL {
                        return Err(violation(name, format!("D={}: fixed-K rate {v} beats K* or the limit", row[0])));
                    }
                }
                if best[i] > limit[i] + TOL || (!sic && best[i] > upper[i] + TOL) {
                    return Err(violation(name, format!("D={}: rate at K* above its bounds", row[0])));
                }
            }
            if sic {
                let basic = table.column("Kstar_value")?;
                if best.iter().zip(&basic).any(|(s, b)| s + TOL < *b) {
                    return Err(violation(name, "SIC curve below the basic one".into()));
                }
            }
        }
        FigureName::OptimalKInD => {
            let range = fp.k_star_range();
            let ok = table.rows.iter().all(|r| r[1..].iter().all(|&k| k.fract() == 0.0 && range.contains(&(k as u32))));
            if !ok {
                return Err(violation(name, "K* outside the searched range".into()));
            }
        }
        FigureName::TableI => {
            for row in &table.rows {
                if !(1.0 < row[1] && row[1] <= row[2]) {
                    return Err(violation(name, format!("K={}: need 1 < alpha <= beta", row[0])));
                }
            }
        }
        FigureName::TableII => {
            for row in &table.rows {
                if !(row[1] >= 1.0 && row[1] <= 1.5) {
                    return Err(violation(name, format!("K={}: beta_sic outside [1, 1.5]", row[0])));
                }
            }
        }
    }
    Ok(())
}
