//! Throwaway calibration probe (not part of the deliverable test surface).

use polarsim::channel::ChannelConfig;
use polarsim::code::PolarCode;
use polarsim::llr::QuantScheme;
use polarsim::montecarlo::{run_point, DecoderSel, StopRule};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let design: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let ebn0: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1.5);
    let algo = args.get(3).map(|s| s.as_str()).unwrap_or("msa-fixed").to_string();
    let max_frames: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(4000);

    let code = PolarCode::construct(15, 1 << 14, design).unwrap();
    let scheme = QuantScheme::new(6, 3, 2).unwrap();
    let sel = DecoderSel::parse(&algo, scheme, 64).unwrap();
    let chan = ChannelConfig::new(ebn0, code.rate(), 1).unwrap();
    let stop = StopRule {
        min_frame_errors: 100,
        max_frames,
    };
    let t = Instant::now();
    let p = run_point(&code, &sel, &chan, &stop).unwrap();
    println!(
        "design={design} ebn0={ebn0} algo={algo}: FER={:.4e} ({}/{} frames, BER={:.3e}) in {:.1}s",
        p.fer,
        p.frame_errors,
        p.frames,
        p.ber,
        t.elapsed().as_secs_f64()
    );
}
