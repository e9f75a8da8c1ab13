//! Output tables and their CSV, JSON and Markdown renderings.
//!
//! Numbers are rounded once when a [`Table`] is built; every format prints
//! the same rounded strings, so content is identical across formats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::burden::{
    composition_breakdown, summary_value, BurdenReport, Column, SummaryRow,
};
use crate::model::{CellKey, CompositionCategory, MoneyBySector, Population, Sector, SectorShares, Sex, StageId};
use crate::uncertainty::SimulationSummary;

const MILLION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Markdown => "md",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(format!("unknown format {other:?} (expected csv, json or md)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    /// Already rounded and formatted with a fixed number of decimals.
    Number(String),
    Empty,
}

impl Cell {
    pub fn num(value: f64, decimals: usize) -> Cell {
        let s = format!("{value:.decimals$}");
        // avoid "-0" and "-0.00"
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            Cell::Number(s.trim_start_matches('-').to_owned())
        } else {
            Cell::Number(s)
        }
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn opt(value: Option<f64>, decimals: usize) -> Cell {
        value.map_or(Cell::Empty, |v| Cell::num(v, decimals))
    }

    fn as_str(&self) -> &str {
        match self {
            Cell::Text(s) | Cell::Number(s) => s,
            Cell::Empty => "",
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Number(s) => s
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, title: &str, columns: &[&str]) -> Table {
        Table {
            name: name.to_owned(),
            title: title.to_owned(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::as_str))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input")
    }

    pub fn to_json(&self, metadata: Option<&Map<String, Value>>) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert(col.clone(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("table".into(), json!(self.name));
        if let Some(m) = metadata {
            doc.insert("metadata".into(), Value::Object(m.clone()));
        }
        doc.insert("columns".into(), json!(self.columns));
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json value");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self, metadata: Option<&Map<String, Value>>) -> String {
        let mut s = format!("# {}\n\n", self.title);
        if let Some(m) = metadata {
            for (k, v) in m {
                let _ = writeln!(s, "- {k}: {v}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "| {} |", self.columns.join(" | "));
        let align: Vec<&str> = self.columns.iter().map(|_| "---").collect();
        let _ = writeln!(s, "| {} |", align.join(" | "));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.as_str().replace('|', "\\|")).collect();
            let _ = writeln!(s, "| {} |", cells.join(" | "));
        }
        s
    }

    pub fn render(&self, format: Format, metadata: Option<&Map<String, Value>>) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(metadata),
            Format::Markdown => self.to_markdown(metadata),
        }
    }
}

/// Writes `table` once per format. CSV metadata goes to `<name>_meta.csv`.
pub fn write_table(
    table: &Table,
    dir: &Path,
    formats: &[Format],
    metadata: Option<&Map<String, Value>>,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for &f in formats {
        let path = dir.join(format!("{}.{}", table.name, f.extension()));
        fs::write(&path, table.render(f, metadata))?;
        written.push(path);
        if f == Format::Csv {
            if let Some(m) = metadata {
                let mut meta = Table::new(&format!("{}_meta", table.name), "", &["key", "value"]);
                for (k, v) in m {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    meta.push(vec![Cell::text(k.clone()), Cell::text(v)]);
                }
                let path = dir.join(format!("{}.csv", meta.name));
                fs::write(&path, meta.to_csv())?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn type_name(stage: StageId) -> &'static str {
    stage.cancer_type().as_str()
}

fn row_parts(row: SummaryRow) -> (String, String, String) {
    match row {
        SummaryRow::Cell(c) => (
            c.population.as_str().to_owned(),
            type_name(c.stage).to_owned(),
            row.label(),
        ),
        SummaryRow::Deaths(p) | SummaryRow::Subtotal(p) => {
            (p.as_str().to_owned(), String::new(), row.label())
        }
        SummaryRow::GrandTotal => (String::new(), String::new(), row.label()),
    }
}

/// Cases and weighted cost (USD millions) by sex, in display order.
pub fn table2(report: &BurdenReport) -> Table {
    let mut t = Table::new(
        "table2",
        "Disease and economic burden by type, stage and sex",
        &[
            "row",
            "population",
            "type",
            "label",
            "n_men",
            "n_women",
            "n_total",
            "cost_men_musd",
            "cost_women_musd",
            "cost_total_musd",
        ],
    );
    for row in SummaryRow::all() {
        let (pop, ty, label) = row_parts(row);
        let vals = Column::ALL.map(|c| summary_value(report, row, c));
        let mut cells = vec![Cell::text(row.key()), Cell::text(pop), Cell::text(ty), Cell::text(label)];
        cells.extend(vals.iter().map(|(n, _)| Cell::opt(*n, 0)));
        cells.extend(vals.iter().map(|(_, c)| Cell::num(c / MILLION, 2)));
        t.push(cells);
    }
    t
}

fn money_cells(m: &MoneyBySector, decimals: usize) -> Vec<Cell> {
    Sector::ALL.iter().map(|&s| Cell::num(m.get(s), decimals)).collect()
}

/// Annual cost per patient by sector and weighted, for one population.
pub fn cost_card_table(report: &BurdenReport, population: Population, shares: &SectorShares) -> Table {
    let (name, title) = match population {
        Population::Incident => ("s17_incident_costs", "Average annual cost per incident patient (USD)"),
        Population::Prevalent => ("s18_prevalent_costs", "Average annual cost per prevalent patient (USD)"),
    };
    let mut t = Table::new(
        name,
        title,
        &["type", "stage", "public", "social_security", "private", "weighted"],
    );
    for stage in StageId::ALL {
        let card = report.costs.card(CellKey::new(population, stage));
        let total = card.total();
        let mut cells = vec![Cell::text(type_name(stage)), Cell::text(stage.stage_token())];
        cells.extend(money_cells(&total, 2));
        cells.push(Cell::num(total.weighted(shares), 2));
        t.push(cells);
    }
    t
}

/// Burden by sector for every cell, death row, subtotal and the total (USD).
pub fn sector_burden_table(report: &BurdenReport) -> Table {
    let mut t = Table::new(
        "s21_sector_burden",
        "Economic burden by health subsector (USD)",
        &["row", "population", "type", "label", "public", "social_security", "private", "total"],
    );
    for row in SummaryRow::all() {
        let money = match row {
            SummaryRow::Cell(c) => report.cell_cost(c),
            SummaryRow::Deaths(p) => report.death_row(p).cost(),
            SummaryRow::Subtotal(p) => report.subtotal(p),
            SummaryRow::GrandTotal => report.grand_total,
        };
        let (pop, ty, label) = row_parts(row);
        let mut cells = vec![Cell::text(row.key()), Cell::text(pop), Cell::text(ty), Cell::text(label)];
        cells.extend(money_cells(&money, 0));
        cells.push(Cell::num(money.total(), 0));
        t.push(cells);
    }
    t
}

/// YLL, YLD and DALY by sex.
pub fn daly_table(report: &BurdenReport) -> Table {
    let mut t = Table::new(
        "daly_s5",
        "Disability-adjusted life years by sex",
        &["sex", "yll", "yld", "daly"],
    );
    let h = &report.health;
    for sex in Sex::ALL {
        let i = sex.index();
        t.push(vec![
            Cell::text(sex.as_str()),
            Cell::num(h.yll_by_sex[i], 0),
            Cell::num(h.yld_by_sex[i], 0),
            Cell::num(h.daly_by_sex[i], 0),
        ]);
    }
    t.push(vec![
        Cell::text("total"),
        Cell::num(h.yll(), 0),
        Cell::num(h.yld(), 0),
        Cell::num(h.daly(), 0),
    ]);
    t
}

/// Category shares of each annual cost card; empty when the card is zero.
pub fn composition_table(report: &BurdenReport, shares: &SectorShares) -> Table {
    let mut t = Table::new(
        "composition_fig3",
        "Composition of the average annual cost per patient",
        &["population", "type", "stage", "category", "weighted", "public", "social_security", "private"],
    );
    for cell in CellKey::all() {
        let comp = composition_breakdown(report.costs.card(cell), shares);
        for cat in CompositionCategory::ALL {
            let mut cells = vec![
                Cell::text(cell.population.as_str()),
                Cell::text(type_name(cell.stage)),
                Cell::text(cell.stage.stage_token()),
                Cell::text(cat.as_str()),
                Cell::opt(comp.weighted.map(|v| v[cat.index()]), 4),
            ];
            cells.extend(comp.by_sector.iter().map(|s| Cell::opt(s.map(|v| v[cat.index()]), 4)));
            t.push(cells);
        }
    }
    t
}

/// Raw and calibrated cohort survivors by stage, sex and year since diagnosis.
pub fn prevalence_by_year_table(report: &BurdenReport) -> Table {
    let mut t = Table::new(
        "prevalence_by_year",
        "Cohort survivors by year since diagnosis",
        &["type", "stage", "sex", "year", "raw_survivors", "calibrated_survivors"],
    );
    let epi = &report.epidemiology;
    for stage in StageId::ALL {
        for sex in Sex::ALL {
            for year in 1..=5 {
                let raw = epi.prevalence_by_year.get(stage, sex, year);
                let f = if year == 1 {
                    epi.calibration.year1
                } else {
                    epi.calibration.years_2_to_5
                };
                t.push(vec![
                    Cell::text(type_name(stage)),
                    Cell::text(stage.stage_token()),
                    Cell::text(sex.as_str()),
                    Cell::text(year.to_string()),
                    Cell::num(raw, 4),
                    Cell::num(raw * f, 4),
                ]);
            }
        }
    }
    t
}

/// Deterministic tables written by `burden run`.
pub fn run_tables(report: &BurdenReport, shares: &SectorShares) -> Vec<Table> {
    vec![
        table2(report),
        cost_card_table(report, Population::Incident, shares),
        cost_card_table(report, Population::Prevalent, shares),
        sector_burden_table(report),
        daly_table(report),
        composition_table(report, shares),
    ]
}

fn metric_unit(name: &str) -> (&'static str, f64, usize) {
    if name.ends_with(".n") {
        ("cases", 1.0, 0)
    } else if name.ends_with(".cost") {
        ("usd_millions", MILLION, 2)
    } else {
        ("years", 1.0, 0)
    }
}

/// Deterministic value, mean and interval of every simulated metric.
pub fn intervals_table(summary: &SimulationSummary) -> Table {
    let mut t = Table::new(
        "table2_intervals",
        "Monte Carlo intervals",
        &["metric", "unit", "deterministic", "mean", "lower", "upper", "sd"],
    );
    for m in &summary.metrics {
        let (unit, div, d) = metric_unit(&m.name);
        let i = &m.interval;
        t.push(vec![
            Cell::text(m.name.clone()),
            Cell::text(unit),
            Cell::num(m.deterministic / div, d),
            Cell::num(i.mean / div, d),
            Cell::num(i.lower / div, d),
            Cell::num(i.upper / div, d),
            Cell::num(i.sd / div, d + 2),
        ]);
    }
    t
}

pub fn simulation_metadata(summary: &SimulationSummary) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("iterations".into(), json!(summary.iterations));
    m.insert("seed".into(), json!(summary.seed));
    m.insert("lower_percentile".into(), json!(summary.percentiles.0));
    m.insert("upper_percentile".into(), json!(summary.percentiles.1));
    m.insert("deaths_sd".into(), json!(summary.spec.deaths_sd));
    m.insert("cost_sd".into(), json!(summary.spec.cost_sd));
    m.insert("mi_ratio_mean".into(), json!(summary.spec.mi_mean));
    m.insert("mi_ratio_sd".into(), json!(summary.spec.mi_sd));
    m
}
