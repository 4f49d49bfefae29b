//! Mean pathloss, SINR, CQI quantization and SINR raster maps.
//!
//! Everything here is deterministic given its inputs; fading enters only
//! through caller-supplied multipliers so that map rendering (mean-only)
//! and TTI simulation (faded) share one SINR computation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: Position) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// A transmitting node: the donor eNB or one relay node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transmitter {
    pub position: Position,
    pub power_dbm: f64,
}

/// Identity of a transmitter within one geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TransmitterId {
    Donor,
    Relay(usize),
}

impl std::fmt::Display for TransmitterId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransmitterId::Donor => write!(f, "donor"),
            TransmitterId::Relay(k) => write!(f, "rn{k}"),
        }
    }
}

/// Identity of a receiver: a UE or a relay node listening on the backhaul.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReceiverId {
    User(usize),
    Relay(usize),
}

impl std::fmt::Display for ReceiverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReceiverId::User(j) => write!(f, "ue{j}"),
            ReceiverId::Relay(k) => write!(f, "rn{k}"),
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Static network layout plus the propagation constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeGeometry {
    pub donor: Transmitter,
    #[serde(default)]
    pub relays: Vec<Transmitter>,
    pub users: Vec<Position>,
    /// Thermal noise in the scheduling bandwidth.
    #[serde(default = "default_noise_floor")]
    pub noise_floor_dbm: f64,
    #[serde(default = "default_pathloss_exponent")]
    pub pathloss_exponent: f64,
    /// Loss at the 1 m reference distance.
    #[serde(default = "default_reference_loss")]
    pub reference_loss_db: f64,
}

fn default_noise_floor() -> f64 {
    -100.0
}

fn default_pathloss_exponent() -> f64 {
    3.5
}

fn default_reference_loss() -> f64 {
    30.0
}

impl NodeGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::domain("geometry needs at least one user"));
        }
        let mut powers = vec![self.donor.power_dbm];
        powers.extend(self.relays.iter().map(|r| r.power_dbm));
        if powers.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("transmit powers must be finite"));
        }
        if !self.noise_floor_dbm.is_finite() {
            return Err(Error::domain("noise floor must be finite"));
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent > 0.0) {
            return Err(Error::domain("pathloss exponent must be finite and > 0"));
        }
        if !self.reference_loss_db.is_finite() {
            return Err(Error::domain("reference loss must be finite"));
        }
        let all = self
            .all_positions()
            .iter()
            .all(|p| p.x.is_finite() && p.y.is_finite());
        if !all {
            return Err(Error::domain("node positions must be finite"));
        }
        Ok(())
    }

    /// Log-distance pathloss, clamped at the 1 m reference distance.
    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(1.0);
        self.reference_loss_db + 10.0 * self.pathloss_exponent * d.log10()
    }

    pub fn transmitter(&self, id: TransmitterId) -> Result<&Transmitter> {
        match id {
            TransmitterId::Donor => Ok(&self.donor),
            TransmitterId::Relay(k) => self
                .relays
                .get(k)
                .ok_or_else(|| Error::domain(format!("relay index {k} out of range"))),
        }
    }

    pub fn receiver_position(&self, id: ReceiverId) -> Result<Position> {
        match id {
            ReceiverId::User(j) => self
                .users
                .get(j)
                .copied()
                .ok_or_else(|| Error::domain(format!("user index {j} out of range"))),
            ReceiverId::Relay(k) => Ok(self.transmitter(TransmitterId::Relay(k))?.position),
        }
    }

    /// Mean received power over the `tx -> at` link, fading excluded.
    pub fn mean_rx_dbm(&self, tx: TransmitterId, at: Position) -> Result<f64> {
        let t = self.transmitter(tx)?;
        Ok(t.power_dbm - self.pathloss_db(t.position.distance(at)))
    }

    fn all_positions(&self) -> Vec<Position> {
        let mut out = vec![self.donor.position];
        out.extend(self.relays.iter().map(|r| r.position));
        out.extend(self.users.iter().copied());
        out
    }
}

/// CQI quantizer and MCS efficiency table.
///
/// CQI 0 means "out of range, no transmission"; CQIs 1..=15 map SINR bins of
/// `step_db` starting at `floor_db` onto the efficiency table, which must be
/// non-decreasing with `efficiency[0] == 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CqiConfig {
    pub floor_db: f64,
    pub step_db: f64,
    pub efficiency: [f64; 16],
}

/// Bits per symbol for CQIs 0..=15; entry 0 is the no-transmission state.
pub const CQI_EFFICIENCY: [f64; 16] = [
    0.0, 0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223,
    3.9023, 4.5234, 5.1152, 5.5547,
];

impl Default for CqiConfig {
    fn default() -> Self {
        CqiConfig {
            floor_db: -6.0,
            step_db: 2.0,
            efficiency: CQI_EFFICIENCY,
        }
    }
}

impl CqiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_db.is_finite() && self.step_db > 0.0) {
            return Err(Error::domain("CQI step must be finite and > 0"));
        }
        if !self.floor_db.is_finite() {
            return Err(Error::domain("CQI floor must be finite"));
        }
        if self.efficiency[0] != 0.0 {
            return Err(Error::domain("efficiency[0] must be 0 (no transmission)"));
        }
        if self.efficiency.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("efficiency table must be non-decreasing"));
        }
        Ok(())
    }

    /// Quantizes an SINR into CQI 0..=15:
    /// `clamp(floor((sinr - floor_db) / step_db) + 1, 0, 15)`.
    pub fn quantize(&self, sinr_db: f64) -> u8 {
        if sinr_db.is_nan() {
            return 0;
        }
        let bin = ((sinr_db - self.floor_db) / self.step_db).floor() + 1.0;
        bin.clamp(0.0, 15.0) as u8
    }

    /// Bits per symbol at the given CQI/MCS index.
    pub fn efficiency(&self, cqi: u8) -> f64 {
        assert!(cqi <= 15, "CQI index {cqi} out of range");
        self.efficiency[cqi as usize]
    }

    /// Center SINR of bin `k` in 1..=15 (lower edge plus half a step).
    pub fn bin_midpoint_db(&self, k: u8) -> f64 {
        assert!((1..=15).contains(&k), "CQI bin {k} out of range");
        self.floor_db + (k as f64 - 1.0) * self.step_db + 0.5 * self.step_db
    }
}

/// Per-link downlink state for one TTI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    /// Mean received power of the serving link, fading excluded.
    pub mean_rx_dbm: f64,
    /// Fading multiplier applied to the serving link.
    pub fading: f64,
    pub interference_mw: f64,
    pub sinr_db: f64,
    pub cqi: u8,
}

/// Evaluates one receiver's SINR against a set of active transmitters.
///
/// The server's transmission is the signal (the server need not be listed in
/// `active`; if it is, it is excluded from interference). Every other active
/// transmitter interferes with its own fading multiplier from `fading`.
/// Errors with [`Error::HalfDuplex`] when the receiver itself is listed as
/// an active transmitter.
pub fn link_state(
    geom: &NodeGeometry,
    active: &[TransmitterId],
    server: TransmitterId,
    receiver: ReceiverId,
    cqi: &CqiConfig,
    mut fading: impl FnMut(TransmitterId) -> f64,
) -> Result<LinkState> {
    if let ReceiverId::Relay(k) = receiver {
        if active.contains(&TransmitterId::Relay(k)) {
            return Err(Error::HalfDuplex(format!(
                "relay rn{k} cannot receive while transmitting"
            )));
        }
    }
    let at = geom.receiver_position(receiver)?;
    let mean_rx_dbm = geom.mean_rx_dbm(server, at)?;
    let fade = fading(server);
    if !(fade.is_finite() && fade >= 0.0) {
        return Err(Error::domain(format!(
            "fading multiplier must be finite and >= 0, got {fade}"
        )));
    }
    let signal_mw = dbm_to_mw(mean_rx_dbm) * fade;
    let mut interference_mw = 0.0;
    for &tx in active {
        if tx == server {
            continue;
        }
        let f = fading(tx);
        interference_mw += dbm_to_mw(geom.mean_rx_dbm(tx, at)?) * f;
    }
    let noise_mw = dbm_to_mw(geom.noise_floor_dbm);
    let sinr_db = mw_to_dbm(signal_mw / (noise_mw + interference_mw));
    Ok(LinkState {
        mean_rx_dbm,
        fading: fade,
        interference_mw,
        sinr_db,
        cqi: cqi.quantize(sinr_db),
    })
}

/// Which transmitters a rendered map assumes are radiating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioTag {
    /// Donor and every relay radiate; best server per pixel.
    RelaysActive,
    /// Only the donor radiates; relays are map furniture.
    RelaysSilent,
}

impl std::fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioTag::RelaysActive => write!(f, "relays_active"),
            ScenarioTag::RelaysSilent => write!(f, "relays_silent"),
        }
    }
}

/// Mean (fading-free) SINR raster. Row-major, row 0 at the lowest y;
/// pixel `(ix, iy)` is sampled at its center.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrGrid {
    pub scenario: ScenarioTag,
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size_m: f64,
    pub width: usize,
    pub height: usize,
    pub sinr_db: Vec<f64>,
    pub best_server: Vec<TransmitterId>,
}

impl SinrGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.sinr_db[iy * self.width + ix]
    }

    pub fn server(&self, ix: usize, iy: usize) -> TransmitterId {
        self.best_server[iy * self.width + ix]
    }

    pub fn pixel_center(&self, ix: usize, iy: usize) -> Position {
        Position::new(
            self.origin_x + (ix as f64 + 0.5) * self.cell_size_m,
            self.origin_y + (iy as f64 + 0.5) * self.cell_size_m,
        )
    }

    /// Pixel containing a position, if inside the raster.
    pub fn index_of(&self, pos: Position) -> Option<(usize, usize)> {
        let ix = ((pos.x - self.origin_x) / self.cell_size_m).floor();
        let iy = ((pos.y - self.origin_y) / self.cell_size_m).floor();
        if ix < 0.0 || iy < 0.0 {
            return None;
        }
        let (ix, iy) = (ix as usize, iy as usize);
        (ix < self.width && iy < self.height).then_some((ix, iy))
    }

    /// One metadata header row, one value row, then the SINR matrix.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("origin_x,origin_y,cell_size_m,width,height,scenario\n");
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            self.origin_x, self.origin_y, self.cell_size_m, self.width, self.height, self.scenario
        ));
        for iy in 0..self.height {
            let row: Vec<String> = (0..self.width)
                .map(|ix| format!("{}", self.value(ix, iy)))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Grayscale heatmap with node markers; y axis points up.
    pub fn to_svg(&self) -> String {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &self.sinr_db {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = if hi > lo { hi - lo } else { 1.0 };
        let px = 8usize;
        let w = self.width * px;
        let h = self.height * px;
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
             viewBox=\"0 0 {w} {h}\">\n"
        ));
        out.push_str(&format!(
            "<title>mean SINR map ({}), {} dB .. {} dB</title>\n",
            self.scenario, lo, hi
        ));
        for iy in 0..self.height {
            for ix in 0..self.width {
                let v = self.value(ix, iy);
                let g = (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8;
                // SVG y grows downward; flip so row 0 (lowest y) is at the bottom.
                let ypix = (self.height - 1 - iy) * px;
                out.push_str(&format!(
                    "<rect x=\"{}\" y=\"{ypix}\" width=\"{px}\" height=\"{px}\" \
                     fill=\"rgb({g},{g},{g})\"/>\n",
                    ix * px
                ));
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Renders the mean-SINR raster over the bounding box of all nodes, padded
/// by one cell. Best server per pixel by mean received power; interference
/// from the remaining radiating transmitters per the scenario tag.
pub fn render_sinr_map(
    geom: &NodeGeometry,
    scenario: ScenarioTag,
    cell_size_m: f64,
) -> Result<SinrGrid> {
    geom.validate()?;
    if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
        return Err(Error::domain(format!(
            "cell size must be finite and > 0, got {cell_size_m}"
        )));
    }
    let positions = geom.all_positions();
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &positions {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let origin_x = min_x - cell_size_m;
    let origin_y = min_y - cell_size_m;
    let width = (((max_x + cell_size_m - origin_x) / cell_size_m).ceil() as usize).max(1);
    let height = (((max_y + cell_size_m - origin_y) / cell_size_m).ceil() as usize).max(1);

    let candidates: Vec<TransmitterId> = match scenario {
        ScenarioTag::RelaysActive => std::iter::once(TransmitterId::Donor)
            .chain((0..geom.relays.len()).map(TransmitterId::Relay))
            .collect(),
        ScenarioTag::RelaysSilent => vec![TransmitterId::Donor],
    };
    let noise_mw = dbm_to_mw(geom.noise_floor_dbm);

    use rayon::prelude::*;
    let rows: Vec<(Vec<f64>, Vec<TransmitterId>)> = (0..height)
        .into_par_iter()
        .map(|iy| {
            let mut sinr_row = Vec::with_capacity(width);
            let mut server_row = Vec::with_capacity(width);
            for ix in 0..width {
                let at = Position::new(
                    origin_x + (ix as f64 + 0.5) * cell_size_m,
                    origin_y + (iy as f64 + 0.5) * cell_size_m,
                );
                let rx_mw: Vec<f64> = candidates
                    .iter()
                    .map(|&tx| dbm_to_mw(geom.mean_rx_dbm(tx, at).expect("validated geometry")))
                    .collect();
                let mut best = 0usize;
                for (k, &p) in rx_mw.iter().enumerate() {
                    if p > rx_mw[best] {
                        best = k;
                    }
                }
                let mut interference = 0.0;
                for (k, &p) in rx_mw.iter().enumerate() {
                    if k != best {
                        interference += p;
                    }
                }
                sinr_row.push(mw_to_dbm(rx_mw[best] / (noise_mw + interference)));
                server_row.push(candidates[best]);
            }
            (sinr_row, server_row)
        })
        .collect();

    let mut sinr_db = Vec::with_capacity(width * height);
    let mut best_server = Vec::with_capacity(width * height);
    for (s, b) in rows {
        sinr_db.extend(s);
        best_server.extend(b);
    }

    Ok(SinrGrid {
        scenario,
        origin_x,
        origin_y,
        cell_size_m,
        width,
        height,
        sinr_db,
        best_server,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_geometry() -> NodeGeometry {
        NodeGeometry {
            donor: Transmitter {
                position: Position::new(0.0, 0.0),
                power_dbm: 46.0,
            },
            relays: vec![Transmitter {
                position: Position::new(500.0, 0.0),
                power_dbm: 30.0,
            }],
            users: vec![Position::new(700.0, 0.0), Position::new(560.0, 0.0)],
            noise_floor_dbm: -100.0,
            pathloss_exponent: 3.5,
            reference_loss_db: 30.0,
        }
    }

    #[test]
    fn pathloss_reference_and_clamp() {
        let geom = small_geometry();
        assert_abs_diff_eq!(geom.pathloss_db(1.0), 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(geom.pathloss_db(0.2), 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(geom.pathloss_db(10.0), 65.0, epsilon = 1e-12);
        assert_abs_diff_eq!(geom.pathloss_db(100.0), 100.0, epsilon = 1e-12);
        assert!(geom.pathloss_db(200.0) > geom.pathloss_db(100.0));
    }

    #[test]
    fn quantizer_anchor_points() {
        let cfg = CqiConfig::default();
        assert_eq!(cfg.quantize(-6.0), 1);
        assert_eq!(cfg.quantize(-6.01), 0);
        assert_eq!(cfg.quantize(-4.01), 1);
        assert_eq!(cfg.quantize(-4.0), 2);
        assert_eq!(cfg.quantize(0.0), 4);
        assert_eq!(cfg.quantize(40.0), 15);
        assert_eq!(cfg.quantize(f64::NEG_INFINITY), 0);
    }

    #[test]
    fn quantizer_idempotent_on_bin_midpoints() {
        let cfg = CqiConfig::default();
        for k in 1..=15u8 {
            let mid = cfg.bin_midpoint_db(k);
            assert_eq!(cfg.quantize(mid), k, "bin {k} midpoint {mid}");
        }
    }

    #[test]
    fn quantizer_is_monotone() {
        let cfg = CqiConfig::default();
        let mut prev = cfg.quantize(-30.0);
        let mut s = -30.0;
        while s < 40.0 {
            let q = cfg.quantize(s);
            assert!(q >= prev, "CQI decreased at {s} dB");
            prev = q;
            s += 0.37;
        }
    }

    #[test]
    fn efficiency_table_shape() {
        let cfg = CqiConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.efficiency(0), 0.0);
        assert_abs_diff_eq!(cfg.efficiency(15), 5.5547);
        for k in 0..15u8 {
            assert!(cfg.efficiency(k + 1) >= cfg.efficiency(k));
        }
        let mut bad = cfg.clone();
        bad.efficiency[3] = 0.01;
        assert!(bad.validate().is_err());
        let mut bad0 = cfg.clone();
        bad0.efficiency[0] = 0.5;
        assert!(bad0.validate().is_err());
    }

    #[test]
    fn link_state_interference_sums_in_milliwatts() {
        let geom = small_geometry();
        let cfg = CqiConfig::default();
        let active = [TransmitterId::Donor, TransmitterId::Relay(0)];
        let ls = link_state(
            &geom,
            &active,
            TransmitterId::Relay(0),
            ReceiverId::User(1),
            &cfg,
            |_| 1.0,
        )
        .unwrap();
        let at = Position::new(560.0, 0.0);
        let s = dbm_to_mw(geom.mean_rx_dbm(TransmitterId::Relay(0), at).unwrap());
        let i = dbm_to_mw(geom.mean_rx_dbm(TransmitterId::Donor, at).unwrap());
        let n = dbm_to_mw(-100.0);
        assert_abs_diff_eq!(ls.sinr_db, mw_to_dbm(s / (n + i)), epsilon = 1e-12);
        assert_abs_diff_eq!(ls.interference_mw, i, epsilon = 1e-18);
        assert_eq!(ls.cqi, cfg.quantize(ls.sinr_db));
    }

    #[test]
    fn half_duplex_breach_is_an_error() {
        let geom = small_geometry();
        let cfg = CqiConfig::default();
        let active = [TransmitterId::Donor, TransmitterId::Relay(0)];
        let err = link_state(
            &geom,
            &active,
            TransmitterId::Donor,
            ReceiverId::Relay(0),
            &cfg,
            |_| 1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::HalfDuplex(_)));
    }

    #[test]
    fn map_covers_all_nodes_and_is_finite() {
        let geom = small_geometry();
        let grid = render_sinr_map(&geom, ScenarioTag::RelaysActive, 25.0).unwrap();
        for p in [
            geom.donor.position,
            geom.relays[0].position,
            geom.users[0],
            geom.users[1],
        ] {
            assert!(grid.index_of(p).is_some(), "node {p:?} outside raster");
        }
        assert!(grid.sinr_db.iter().all(|v| v.is_finite()));
        assert_eq!(grid.sinr_db.len(), grid.width * grid.height);
    }

    #[test]
    fn relay_pixel_prefers_relay_server() {
        let geom = small_geometry();
        let grid = render_sinr_map(&geom, ScenarioTag::RelaysActive, 10.0).unwrap();
        let (ix, iy) = grid.index_of(geom.relays[0].position).unwrap();
        assert_eq!(grid.server(ix, iy), TransmitterId::Relay(0));
        let (dx, dy) = grid.index_of(geom.donor.position).unwrap();
        assert_eq!(grid.server(dx, dy), TransmitterId::Donor);
    }

    #[test]
    fn silent_map_equals_stripped_geometry_bitwise() {
        // Relays inside the bounding box of donor and users, so removing
        // them leaves the raster frame unchanged.
        let mut geom = small_geometry();
        geom.users.push(Position::new(-50.0, -40.0));
        geom.users.push(Position::new(720.0, 60.0));
        let silent = render_sinr_map(&geom, ScenarioTag::RelaysSilent, 20.0).unwrap();
        let mut stripped = geom.clone();
        stripped.relays.clear();
        let bare = render_sinr_map(&stripped, ScenarioTag::RelaysActive, 20.0).unwrap();
        assert_eq!(silent.width, bare.width);
        assert_eq!(silent.height, bare.height);
        for (a, b) in silent.sinr_db.iter().zip(bare.sinr_db.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn far_pixels_fall_back_to_donor() {
        let geom = small_geometry();
        let grid = render_sinr_map(&geom, ScenarioTag::RelaysActive, 25.0).unwrap();
        let (ix, iy) = grid.index_of(Position::new(-20.0, -20.0)).unwrap();
        assert_eq!(grid.server(ix, iy), TransmitterId::Donor);
    }

    #[test]
    fn degenerate_rasters_rejected() {
        let geom = small_geometry();
        assert!(render_sinr_map(&geom, ScenarioTag::RelaysActive, 0.0).is_err());
        assert!(render_sinr_map(&geom, ScenarioTag::RelaysActive, -1.0).is_err());
        let empty = NodeGeometry {
            users: vec![],
            ..small_geometry()
        };
        assert!(render_sinr_map(&empty, ScenarioTag::RelaysActive, 10.0).is_err());
    }

    #[test]
    fn csv_shape_matches_grid() {
        let geom = small_geometry();
        let grid = render_sinr_map(&geom, ScenarioTag::RelaysSilent, 50.0).unwrap();
        let csv = grid.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), grid.height + 2);
        assert!(lines[0].starts_with("origin_x,"));
        assert!(lines[1].ends_with("relays_silent"));
        assert_eq!(lines[2].split(',').count(), grid.width);
        let svg = grid.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("</svg>"));
    }
}
