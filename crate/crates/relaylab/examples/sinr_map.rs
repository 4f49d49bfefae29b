//! Renders the mean-SINR raster for a one-donor, one-relay geometry, with
//! relays radiating and silent, and prints a small text heatmap.

use relaylab::radio::{render_sinr_map, NodeGeometry, Position, ScenarioTag, Transmitter};

fn main() {
    let geom = NodeGeometry {
        donor: Transmitter {
            position: Position::new(0.0, 0.0),
            power_dbm: 46.0,
        },
        relays: vec![Transmitter {
            position: Position::new(500.0, 0.0),
            power_dbm: 30.0,
        }],
        users: vec![Position::new(700.0, 0.0), Position::new(560.0, 200.0)],
        noise_floor_dbm: -100.0,
        pathloss_exponent: 3.5,
        reference_loss_db: 30.0,
    };

    for tag in [ScenarioTag::RelaysActive, ScenarioTag::RelaysSilent] {
        let grid = render_sinr_map(&geom, tag, 50.0).unwrap();
        println!("{tag}: {} x {} cells, {} m each", grid.width, grid.height, grid.cell_size_m);
        // Rows top-down so the map reads like a picture; '#' is strong SINR.
        let ramp = [' ', '.', ':', '-', '=', '+', '*', '#'];
        for row in (0..grid.height).rev() {
            let line: String = (0..grid.width)
                .map(|col| {
                    let v = grid.value(col, row);
                    let idx = (((v + 10.0) / 50.0 * ramp.len() as f64) as isize)
                        .clamp(0, ramp.len() as isize - 1);
                    ramp[idx as usize]
                })
                .collect();
            println!("  |{line}|");
        }
        let (lo, hi) = grid
            .sinr_db
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        println!("  SINR range: {lo:.1} .. {hi:.1} dB\n");
    }
}
