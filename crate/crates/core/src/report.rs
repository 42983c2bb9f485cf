//! SVG charts and the JSON summary document.
//!
//! Charts read every number from [`Statistics`]; nothing is recomputed here.
//! Each data mark carries a `data-value` attribute and a `<title>` with the
//! printed value, and most chart kinds also draw a visible label.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{Paradigm, RequirementWeightSource};
use crate::simulation::{ConfigEcho, Level};
use crate::stats::{EmpiricalDistribution, RankProbabilityTable, Statistics, Summary};

pub const SUMMARY_SCHEMA: &str = "mivesmc-summary/1";

const RED: (f64, f64, f64) = (215.0, 48.0, 39.0);
const YELLOW: (f64, f64, f64) = (255.0, 255.0, 191.0);
const GREEN: (f64, f64, f64) = (26.0, 152.0, 80.0);
const SCENARIO_COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Distribution,
    StackedBar,
    Radar,
    Heatmap,
    RankBar,
}

impl ChartKind {
    pub const ALL: [ChartKind; 5] = [
        ChartKind::Distribution,
        ChartKind::StackedBar,
        ChartKind::Radar,
        ChartKind::Heatmap,
        ChartKind::RankBar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartKind::Distribution => "distribution",
            ChartKind::StackedBar => "stacked_bar",
            ChartKind::Radar => "radar",
            ChartKind::Heatmap => "heatmap",
            ChartKind::RankBar => "rank_bar",
        }
    }
}

impl std::str::FromStr for ChartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChartKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| Error::ChartRequest(format!("unknown chart kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartRequest {
    pub kind: ChartKind,
    pub level: Level,
    pub paradigm: Paradigm,
    pub output: PathBuf,
}

impl ChartRequest {
    pub fn new(kind: ChartKind, level: Level, paradigm: Paradigm, output: impl Into<PathBuf>) -> Self {
        ChartRequest {
            kind,
            level,
            paradigm,
            output: output.into(),
        }
    }
}

/// Statistics for one or more paradigms, at most one each.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub paradigms: Vec<Statistics>,
}

impl ReportBundle {
    pub fn new(paradigms: Vec<Statistics>) -> Result<Self> {
        if paradigms.is_empty() {
            return Err(Error::Empty("report bundle has no results".into()));
        }
        for (i, s) in paradigms.iter().enumerate() {
            if paradigms[..i].iter().any(|o| o.paradigm == s.paradigm) {
                return Err(Error::ChartRequest(format!(
                    "two results for the {} paradigm",
                    s.paradigm
                )));
            }
        }
        Ok(ReportBundle { paradigms })
    }

    pub fn get(&self, paradigm: Paradigm) -> Result<&Statistics> {
        self.paradigms
            .iter()
            .find(|s| s.paradigm == paradigm)
            .ok_or_else(|| Error::ChartRequest(format!("no {paradigm} results in bundle")))
    }
}

/// Linear red-yellow-green ramp over [0, 1]; out-of-range values are clamped.
pub fn ramp_color(v: f64) -> String {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let (a, b, t) = if v <= 0.5 {
        (RED, YELLOW, v / 0.5)
    } else {
        (YELLOW, GREEN, (v - 0.5) / 0.5)
    };
    let mix = |x: f64, y: f64| (x + (y - x) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

pub fn label(v: f64) -> String {
    format!("{v:.3}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn scenario_color(s: usize) -> &'static str {
    SCENARIO_COLORS[s % SCENARIO_COLORS.len()]
}

struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg {
            width,
            height,
            body: String::new(),
        }
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, class: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" class="{class}">{}</text>"#,
            esc(content)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" class="{class}"/>"#
        );
    }

    /// A data rectangle with its value in `data-value` and a tooltip title.
    #[allow(clippy::too_many_arguments)]
    fn datum_rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, value: &str, title: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect class="datum" x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" data-value="{value}"><title>{}</title></rect>"#,
            esc(title)
        );
    }

    fn datum_point(&mut self, x: f64, y: f64, fill: &str, value: &str, title: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="datum" cx="{x:.2}" cy="{y:.2}" r="3" fill="{fill}" data-value="{value}"><title>{}</title></circle>"#,
            esc(title)
        );
    }

    fn finish(self, title: &str, subtitle: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(out, "<title>{}</title>", esc(title));
        let _ = writeln!(out, "<desc>{}</desc>", esc(subtitle));
        out.push_str(
            "<style>.axis{stroke:#333;stroke-width:1}.grid{stroke:#ccc;stroke-width:0.5}\
             .cdf{fill:none;stroke-width:1.5}.series{fill-opacity:0.15;stroke-width:1.5}\
             .value{font-size:9px}.heading{font-size:14px;font-weight:bold}.note{fill:#555}</style>\n",
        );
        let _ = writeln!(
            out,
            r#"<rect x="0" y="0" width="{:.0}" height="{:.0}" fill="white"/>"#,
            self.width, self.height
        );
        let _ = writeln!(
            out,
            r#"<text x="10" y="18" class="heading">{}</text>"#,
            esc(title)
        );
        let _ = writeln!(out, r#"<text x="10" y="34" class="note">{}</text>"#, esc(subtitle));
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn config_line(config: &ConfigEcho) -> String {
    format!(
        "seed {}; {} runs; {} mode; min weight {}; criteria weights {}; requirement weights {}",
        config.seed,
        config.n_runs,
        config.constraint_mode,
        config.min_weight,
        config.stakeholder_profile,
        weight_source_label(config.requirement_weight_source)
    )
}

pub fn weight_source_label(source: RequirementWeightSource) -> &'static str {
    match source {
        RequirementWeightSource::EqualDefault => "equal default",
        RequirementWeightSource::Config => "from tree config",
        RequirementWeightSource::Override => "command-line override",
    }
}

fn level_title(level: Level) -> &'static str {
    match level {
        Level::Overall => "overall index",
        Level::Requirement => "requirements",
        Level::Criterion => "criteria",
    }
}

/// Renders one chart as an SVG document without writing it.
pub fn render_chart(bundle: &ReportBundle, request: &ChartRequest) -> Result<String> {
    let stats = bundle.get(request.paradigm)?;
    if stats.scenarios.is_empty() {
        return Err(Error::ChartRequest("no scenarios to chart".into()));
    }
    match request.kind {
        ChartKind::Heatmap => Ok(heatmap(stats, request.level)),
        ChartKind::StackedBar => Ok(stacked_bar(stats, request.level)),
        ChartKind::RankBar => Ok(rank_bar(stats, request.level)),
        ChartKind::Radar => radar(stats, request.level),
        ChartKind::Distribution => Ok(distribution(stats, request.level)),
    }
}

/// Writes one SVG per request and returns the documents in request order.
pub fn emit_charts(bundle: &ReportBundle, requests: &[ChartRequest]) -> Result<Vec<(PathBuf, String)>> {
    let docs = requests
        .iter()
        .map(|r| render_chart(bundle, r).map(|svg| (r.output.clone(), svg)))
        .collect::<Result<Vec<_>>>()?;
    for (path, svg) in &docs {
        write_file(path, svg)?;
    }
    Ok(docs)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// First-rank probability per node (columns) and scenario (rows).
fn heatmap(stats: &Statistics, level: Level) -> String {
    let table = stats.ranks(level);
    let names = stats.node_ids(level);
    let (cell_w, cell_h, left, top) = (64.0, 34.0, 70.0, 76.0);
    let n_s = stats.scenarios.len();
    let width = left + cell_w * names.len() as f64 + 20.0;
    let height = top + cell_h * n_s as f64 + 70.0;
    let mut svg = Svg::new(width.max(420.0), height);
    for (k, id) in names.iter().enumerate() {
        svg.text(left + cell_w * (k as f64 + 0.5), top - 8.0, "middle", "column", id);
    }
    for (s, scen) in stats.scenarios.iter().enumerate() {
        let y = top + cell_h * s as f64;
        svg.text(left - 8.0, y + cell_h / 2.0 + 4.0, "end", "row", scen);
        for (k, node) in table.nodes.iter().enumerate() {
            let p = node.probabilities[s][0];
            let x = left + cell_w * k as f64;
            let v = label(p);
            svg.datum_rect(
                x,
                y,
                cell_w,
                cell_h,
                &ramp_color(p),
                &v,
                &format!("{} {}: P(first) = {v}", node.node, scen),
            );
            svg.text(x + cell_w / 2.0, y + cell_h / 2.0 + 4.0, "middle", "value", &v);
        }
    }
    legend_ramp(&mut svg, left, top + cell_h * n_s as f64 + 24.0);
    svg.finish(
        &format!(
            "{} first-rank probability, {}",
            stats.paradigm,
            level_title(level)
        ),
        &config_line(&stats.config),
    )
}

fn legend_ramp(svg: &mut Svg, x: f64, y: f64) {
    let steps = 10;
    for i in 0..=steps {
        let v = i as f64 / steps as f64;
        let _ = writeln!(
            svg.body,
            r#"<rect x="{:.2}" y="{y:.2}" width="16" height="10" fill="{}"/>"#,
            x + 16.0 * i as f64,
            ramp_color(v)
        );
    }
    svg.text(x, y + 24.0, "start", "legend", "0");
    svg.text(x + 16.0 * steps as f64 + 16.0, y + 24.0, "end", "legend", "1");
}

fn bar_layout(n_nodes: usize, n_s: usize) -> (f64, f64, f64) {
    let bar_w = 18.0;
    let group_w = bar_w * n_s as f64 + 16.0;
    let width = 70.0 + group_w * n_nodes as f64 + 130.0;
    (bar_w, group_w, width)
}

fn y_axis(svg: &mut Svg, left: f64, top: f64, plot_h: f64, right: f64, max: f64) {
    for i in 0..=4 {
        let v = max * i as f64 / 4.0;
        let y = top + plot_h - plot_h * i as f64 / 4.0;
        svg.line(left, y, right, y, "grid");
        svg.text(left - 6.0, y + 4.0, "end", "tick", &format!("{v:.2}"));
    }
    svg.line(left, top, left, top + plot_h, "axis");
    svg.line(left, top + plot_h, right, top + plot_h, "axis");
}

/// Rank-position probabilities stacked per scenario, grouped by node.
fn stacked_bar(stats: &Statistics, level: Level) -> String {
    let table = stats.ranks(level);
    let n_s = stats.scenarios.len();
    let (bar_w, group_w, width) = bar_layout(table.nodes.len(), n_s);
    let (left, top, plot_h) = (60.0, 56.0, 260.0);
    let right = left + group_w * table.nodes.len() as f64;
    let mut svg = Svg::new(width, top + plot_h + 60.0);
    y_axis(&mut svg, left, top, plot_h, right, 1.0);
    for (k, node) in table.nodes.iter().enumerate() {
        let gx = left + 8.0 + group_w * k as f64;
        for (s, scen) in stats.scenarios.iter().enumerate() {
            let x = gx + bar_w * s as f64;
            let mut acc = 0.0;
            for (pos, &p) in node.probabilities[s].iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let h = plot_h * p;
                let y = top + plot_h - plot_h * acc - h;
                acc += p;
                let v = label(p);
                svg.datum_rect(
                    x,
                    y,
                    bar_w - 2.0,
                    h,
                    &position_color(pos, n_s),
                    &v,
                    &format!("{} {scen}: P(rank {}) = {v}", node.node, pos + 1),
                );
                svg.text(x + bar_w / 2.0 - 1.0, y + h / 2.0 + 3.0, "middle", "value", &v);
            }
            svg.text(x + bar_w / 2.0 - 1.0, top + plot_h + 12.0, "middle", "tick", scen);
        }
        svg.text(
            gx + bar_w * n_s as f64 / 2.0,
            top + plot_h + 28.0,
            "middle",
            "column",
            &node.node,
        );
    }
    for pos in 0..n_s {
        let y = top + 14.0 * pos as f64;
        let _ = writeln!(
            svg.body,
            r#"<rect x="{:.2}" y="{y:.2}" width="10" height="10" fill="{}"/>"#,
            right + 16.0,
            position_color(pos, n_s)
        );
        svg.text(right + 30.0, y + 9.0, "start", "legend", &format!("rank {}", pos + 1));
    }
    svg.finish(
        &format!("{} rank probabilities, {}", stats.paradigm, level_title(level)),
        &config_line(&stats.config),
    )
}

fn position_color(pos: usize, n: usize) -> String {
    if n <= 1 {
        ramp_color(1.0)
    } else {
        ramp_color(1.0 - pos as f64 / (n - 1) as f64)
    }
}

/// First-rank probability as grouped bars.
fn rank_bar(stats: &Statistics, level: Level) -> String {
    let table = stats.ranks(level);
    let n_s = stats.scenarios.len();
    let (bar_w, group_w, width) = bar_layout(table.nodes.len(), n_s);
    let (left, top, plot_h) = (60.0, 56.0, 260.0);
    let right = left + group_w * table.nodes.len() as f64;
    let mut svg = Svg::new(width, top + plot_h + 60.0);
    y_axis(&mut svg, left, top, plot_h, right, 1.0);
    for (k, node) in table.nodes.iter().enumerate() {
        let gx = left + 8.0 + group_w * k as f64;
        for (s, scen) in stats.scenarios.iter().enumerate() {
            let p = node.probabilities[s][0];
            let x = gx + bar_w * s as f64;
            let h = plot_h * p;
            let v = label(p);
            svg.datum_rect(
                x,
                top + plot_h - h,
                bar_w - 2.0,
                h,
                scenario_color(s),
                &v,
                &format!("{} {scen}: P(first) = {v}", node.node),
            );
            svg.text(x + bar_w / 2.0 - 1.0, top + plot_h - h - 3.0, "middle", "value", &v);
        }
        svg.text(
            gx + bar_w * n_s as f64 / 2.0,
            top + plot_h + 16.0,
            "middle",
            "column",
            &node.node,
        );
    }
    scenario_legend(&mut svg, &stats.scenarios, right + 16.0, top);
    svg.finish(
        &format!("{} first-rank probability, {}", stats.paradigm, level_title(level)),
        &config_line(&stats.config),
    )
}

fn scenario_legend(svg: &mut Svg, scenarios: &[String], x: f64, y: f64) {
    for (s, scen) in scenarios.iter().enumerate() {
        let yy = y + 14.0 * s as f64;
        let _ = writeln!(
            svg.body,
            r#"<rect x="{x:.2}" y="{yy:.2}" width="10" height="10" fill="{}"/>"#,
            scenario_color(s)
        );
        svg.text(x + 14.0, yy + 9.0, "start", "legend", scen);
    }
}

/// Mean value per node on radial axes, one polygon per scenario.
fn radar(stats: &Statistics, level: Level) -> Result<String> {
    let names = stats.node_names(level);
    let ids = stats.node_ids(level);
    if names.len() < 3 {
        return Err(Error::ChartRequest("radar requires ≥3 axes".into()));
    }
    let means = stats.means.level(level);
    let (cx, cy, r) = (300.0, 300.0, 200.0);
    let mut svg = Svg::new(640.0, 580.0);
    let n = names.len();
    let angle = |k: usize| -std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * k as f64 / n as f64;
    let at = |k: usize, v: f64| (cx + r * v * angle(k).cos(), cy + r * v * angle(k).sin());
    for ring in 1..=4 {
        let v = ring as f64 / 4.0;
        let pts: Vec<String> = (0..n)
            .map(|k| {
                let (x, y) = at(k, v);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg.body,
            r#"<polygon points="{}" fill="none" class="grid"/>"#,
            pts.join(" ")
        );
    }
    for k in 0..n {
        let (x, y) = at(k, 1.0);
        svg.line(cx, cy, x, y, "axis");
        let (lx, ly) = at(k, 1.12);
        let anchor = if (lx - cx).abs() < 1.0 {
            "middle"
        } else if lx > cx {
            "start"
        } else {
            "end"
        };
        svg.text(lx, ly + 4.0, anchor, "column", &format!("{} {}", ids[k], names[k]));
    }
    for (s, scen) in stats.scenarios.iter().enumerate() {
        let color = scenario_color(s);
        let pts: Vec<String> = (0..n)
            .map(|k| {
                let (x, y) = at(k, means[k][s].clamp(0.0, 1.0));
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg.body,
            r#"<polygon points="{}" class="series" fill="{color}" stroke="{color}"/>"#,
            pts.join(" ")
        );
        for k in 0..n {
            let m = means[k][s];
            let (x, y) = at(k, m.clamp(0.0, 1.0));
            let v = label(m);
            svg.datum_point(x, y, color, &v, &format!("{} {scen}: mean = {v}", ids[k]));
            let _ = writeln!(
                svg.body,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="start" class="value" fill="{color}">{v}</text>"#,
                x + 4.0,
                y - 4.0 + 10.0 * s as f64
            );
        }
    }
    scenario_legend(&mut svg, &stats.scenarios, 540.0, 60.0);
    Ok(svg.finish(
        &format!("{} mean value, {}", stats.paradigm, level_title(level)),
        &config_line(&stats.config),
    ))
}

/// Histogram bars and step CDF per node, one panel per node.
fn distribution(stats: &Statistics, level: Level) -> String {
    let all = stats.distributions.level(level);
    let ids = stats.node_ids(level);
    let (panel_w, panel_h, cols) = (300.0, 200.0, 3usize);
    let rows = all.len().div_ceil(cols);
    let cols_used = all.len().min(cols);
    let width = 20.0 + (panel_w + 30.0) * cols_used as f64 + 80.0;
    let height = 56.0 + (panel_h + 60.0) * rows as f64;
    let mut svg = Svg::new(width, height);
    for (k, dists) in all.iter().enumerate() {
        let ox = 50.0 + (panel_w + 30.0) * (k % cols) as f64;
        let oy = 60.0 + (panel_h + 60.0) * (k / cols) as f64;
        distribution_panel(&mut svg, &ids[k], &stats.scenarios, dists, ox, oy, panel_w, panel_h);
    }
    scenario_legend(&mut svg, &stats.scenarios, width - 70.0, 56.0);
    svg.finish(
        &format!("{} value distribution, {}", stats.paradigm, level_title(level)),
        &config_line(&stats.config),
    )
}

#[allow(clippy::too_many_arguments)]
fn distribution_panel(
    svg: &mut Svg,
    node: &str,
    scenarios: &[String],
    dists: &[EmpiricalDistribution],
    ox: f64,
    oy: f64,
    w: f64,
    h: f64,
) {
    let lo = dists.iter().map(|d| d.edges[0]).fold(f64::INFINITY, f64::min);
    let hi = dists
        .iter()
        .map(|d| d.edges[d.edges.len() - 1])
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi - lo < 1e-9 { 0.01 } else { 0.0 };
    let (lo, hi) = (lo - pad, hi + pad);
    let x_of = |v: f64| ox + w * (v - lo) / (hi - lo);
    let y_of = |frac: f64| oy + h - h * frac;
    let max_frac = dists
        .iter()
        .flat_map(|d| d.counts.iter().map(move |&c| c as f64 / d.total() as f64))
        .fold(0.0, f64::max);

    svg.text(ox + w / 2.0, oy - 8.0, "middle", "column", node);
    svg.line(ox, oy + h, ox + w, oy + h, "axis");
    svg.line(ox, oy, ox, oy + h, "axis");
    svg.text(ox, oy + h + 14.0, "middle", "tick", &format!("{lo:.3}"));
    svg.text(ox + w, oy + h + 14.0, "middle", "tick", &format!("{hi:.3}"));
    svg.text(ox - 4.0, oy + 4.0, "end", "tick", "1");

    let n_s = dists.len() as f64;
    for (s, d) in dists.iter().enumerate() {
        let color = scenario_color(s);
        let total = d.total() as f64;
        let n_bins = d.counts.len();
        for b in 0..n_bins {
            let frac = d.counts[b] as f64 / total;
            let (a, z) = (d.edges[b], d.edges[b + 1]);
            let (mut xa, mut xz) = (x_of(a), x_of(z));
            if xz - xa < 2.0 {
                let mid = (xa + xz) / 2.0;
                xa = mid - 1.5;
                xz = mid + 1.5;
            }
            // Bars of different scenarios share a bin width, side by side.
            let bw = (xz - xa) / n_s;
            let bh = h * 0.9 * frac / max_frac;
            let _ = writeln!(
                svg.body,
                r#"<rect class="datum" x="{:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="{color}" fill-opacity="0.6" data-value="{}"><title>{} [{}, {}]: {} runs, cumulative {}</title></rect>"#,
                xa + bw * s as f64,
                oy + h - bh,
                bw,
                d.counts[b],
                esc(&scenarios[s]),
                label(a),
                label(z),
                d.counts[b],
                label(d.cdf[b])
            );
        }
        let mut pts = vec![(x_of(d.edges[0]), y_of(0.0))];
        let mut prev = 0.0;
        for b in 0..n_bins {
            let x = x_of(d.edges[b + 1]);
            pts.push((x, y_of(prev)));
            pts.push((x, y_of(d.cdf[b])));
            prev = d.cdf[b];
        }
        pts.push((ox + w, y_of(prev)));
        let pts: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            svg.body,
            r#"<polyline class="cdf" stroke="{color}" points="{}"/>"#,
            pts.join(" ")
        );
    }
}

/// Overall means of two paradigms side by side, with 95% interval whiskers.
pub fn comparison_chart(bundle: &ReportBundle) -> Result<String> {
    if bundle.paradigms.len() < 2 {
        return Err(Error::ChartRequest("comparison needs two paradigms".into()));
    }
    let sets = &bundle.paradigms;
    let scenarios = &sets[0].scenarios;
    if sets.iter().any(|s| &s.scenarios != scenarios) {
        return Err(Error::ChartRequest("paradigms have different scenarios".into()));
    }
    let (left, top, plot_h, bar_w) = (60.0, 56.0, 260.0, 26.0);
    let group_w = bar_w * sets.len() as f64 + 24.0;
    let right = left + group_w * scenarios.len() as f64;
    let mut svg = Svg::new(right + 160.0, top + plot_h + 50.0);
    y_axis(&mut svg, left, top, plot_h, right, 1.0);
    let colors = ["#4575b4", "#fdae61", "#66bd63", "#f46d43"];
    for (s, scen) in scenarios.iter().enumerate() {
        let gx = left + 12.0 + group_w * s as f64;
        for (p, stats) in sets.iter().enumerate() {
            let sm = &stats.summaries[s];
            let x = gx + bar_w * p as f64;
            let h = plot_h * sm.mean;
            let v = label(sm.mean);
            svg.datum_rect(
                x,
                top + plot_h - h,
                bar_w - 2.0,
                h,
                colors[p % colors.len()],
                &v,
                &format!(
                    "{} {scen}: mean {v}, 95% interval [{}, {}]",
                    stats.paradigm,
                    label(sm.p2_5),
                    label(sm.p97_5)
                ),
            );
            let xm = x + bar_w / 2.0 - 1.0;
            svg.line(xm, top + plot_h * (1.0 - sm.p97_5), xm, top + plot_h * (1.0 - sm.p2_5), "axis");
            svg.text(xm, top + plot_h - h - 14.0, "middle", "value", &v);
        }
        svg.text(
            gx + bar_w * sets.len() as f64 / 2.0,
            top + plot_h + 16.0,
            "middle",
            "column",
            scen,
        );
    }
    for (p, stats) in sets.iter().enumerate() {
        let y = top + 14.0 * p as f64;
        let _ = writeln!(
            svg.body,
            r#"<rect x="{:.2}" y="{y:.2}" width="10" height="10" fill="{}"/>"#,
            right + 16.0,
            colors[p % colors.len()]
        );
        svg.text(right + 30.0, y + 9.0, "start", "legend", stats.paradigm.as_str());
    }
    let subtitle = sets
        .iter()
        .map(|s| format!("{}: {}", s.paradigm, config_line(&s.config)))
        .collect::<Vec<_>>()
        .join(" | ");
    Ok(svg.finish("Overall index by paradigm", &subtitle))
}

/// The standard set of charts for every paradigm in the bundle.
pub fn standard_requests(bundle: &ReportBundle, dir: &Path) -> Vec<ChartRequest> {
    let mut out = Vec::new();
    for stats in &bundle.paradigms {
        let p = stats.paradigm;
        let mut push = |kind: ChartKind, level: Level| {
            let name = format!("{p}_{}_{}.svg", kind.as_str(), level.as_str());
            out.push(ChartRequest::new(kind, level, p, dir.join(name)));
        };
        for level in [Level::Overall, Level::Requirement, Level::Criterion] {
            push(ChartKind::Distribution, level);
            push(ChartKind::StackedBar, level);
            push(ChartKind::RankBar, level);
        }
        for level in [Level::Requirement, Level::Criterion] {
            push(ChartKind::Heatmap, level);
        }
        for level in [Level::Requirement, Level::Criterion] {
            if stats.node_ids(level).len() >= 3 {
                push(ChartKind::Radar, level);
            }
        }
    }
    out
}

/// Writes the chart suite, per-paradigm CSV tables, the comparison chart when
/// two paradigms are present, and `summary.json`. Returns the written paths.
pub fn emit_report(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let requests = standard_requests(bundle, dir);
    let mut files: Vec<PathBuf> = emit_charts(bundle, &requests)?
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    if bundle.paradigms.len() >= 2 {
        let path = dir.join("comparison_overall.svg");
        write_file(&path, &comparison_chart(bundle)?)?;
        files.push(path);
    }
    for stats in &bundle.paradigms {
        let path = dir.join(format!("{}_statistics.csv", stats.paradigm));
        write_file(&path, &stats.to_csv())?;
        files.push(path);
    }
    let path = dir.join("summary.json");
    emit_summary(bundle, &path)?;
    files.push(path);
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub schema: String,
    pub paradigms: Vec<ParadigmSummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadigmSummary {
    pub paradigm: Paradigm,
    pub config: ConfigEcho,
    pub provenance: Provenance,
    pub scenarios: Vec<String>,
    pub requirements: Vec<NodeSummary>,
    pub criteria: Vec<NodeSummary>,
    pub overall: Vec<Summary>,
    pub rank_overall: RankProbabilityTable,
    pub rank_requirement: RankProbabilityTable,
    pub rank_criterion: RankProbabilityTable,
    /// Published values for the bundled case study, when this paradigm has any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub criterion_weights: String,
    pub requirement_weights: String,
    pub indicator_weights: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub id: String,
    pub name: String,
    pub weight: f64,
    pub mean: Vec<f64>,
    pub first: Vec<f64>,
}

pub fn summary_document(bundle: &ReportBundle) -> SummaryDocument {
    let reference = crate::data::reference();
    let paradigms = bundle
        .paradigms
        .iter()
        .map(|stats| {
            let nodes = |level: Level, infos: &[crate::simulation::NodeInfo]| -> Vec<NodeSummary> {
                let means = stats.means.level(level);
                infos
                    .iter()
                    .zip(&stats.ranks(level).nodes)
                    .zip(means)
                    .map(|((info, ranks), mean)| NodeSummary {
                        id: info.id.clone(),
                        name: info.name.clone(),
                        weight: info.weight,
                        mean,
                        first: ranks.first(),
                    })
                    .collect()
            };
            ParadigmSummary {
                paradigm: stats.paradigm,
                config: stats.config.clone(),
                provenance: Provenance {
                    criterion_weights: format!("AHP, {} profile", stats.config.stakeholder_profile),
                    requirement_weights: weight_source_label(stats.config.requirement_weight_source)
                        .to_string(),
                    indicator_weights: format!(
                        "Latin Hypercube, {} mode, min weight {}",
                        stats.config.constraint_mode,
                        stats.config.min_weight
                    ),
                },
                scenarios: stats.scenarios.clone(),
                requirements: nodes(Level::Requirement, &stats.requirements),
                criteria: nodes(Level::Criterion, &stats.criteria),
                overall: stats.summaries.clone(),
                rank_overall: stats.rank_overall.clone(),
                rank_requirement: stats.rank_requirement.clone(),
                rank_criterion: stats.rank_criterion.clone(),
                published: published_for(&reference, stats),
            }
        })
        .collect();
    let notes = reference["notes"]
        .as_array()
        .map(|a| a.iter().filter_map(|n| n.as_str().map(String::from)).collect())
        .unwrap_or_default();
    SummaryDocument {
        schema: SUMMARY_SCHEMA.to_string(),
        paradigms,
        notes,
    }
}

/// Published values apply only when the scenarios are the bundled ones.
fn published_for(reference: &serde_json::Value, stats: &Statistics) -> Option<serde_json::Value> {
    let block = reference["paradigms"].get(stats.paradigm.as_str())?;
    let expected = ["S1", "S2", "S3"];
    if stats.scenarios.iter().map(String::as_str).ne(expected) {
        return None;
    }
    Some(block.clone())
}

/// Writes the summary as pretty JSON. No timestamp, so reruns are identical.
pub fn emit_summary(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let doc = summary_document(bundle);
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_file(path, &text)
}
