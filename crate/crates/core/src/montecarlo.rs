//! Frame-parallel Monte Carlo error-rate evaluation.
//!
//! Frames are processed in fixed-size rounds; each frame derives all its
//! randomness from `(seed, frame index)`, the per-round aggregation is a
//! commutative sum, and the stop rule is evaluated on round boundaries only,
//! so results are byte-identical for any worker count.

use crate::arch::{ArchConfig, Simulator};
use crate::channel::{gen_frame, ChannelConfig};
use crate::code::PolarCode;
use crate::decoder::{DecodeAlgo, ScDecoder};
use crate::llr::{quantize_channel, QuantScheme};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Deserialize;
use std::fmt::Write as _;

/// Frames evaluated between stop-rule checks. Fixed so that the stopping
/// point cannot depend on the worker count.
const ROUND_FRAMES: u64 = 512;

/// Stop once `min_frame_errors` have been seen, or at `max_frames`.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_frame_errors: 100,
            max_frames: 10_000_000,
        }
    }
}

/// Which decode route a Monte Carlo run exercises.
#[derive(Debug, Clone, Copy)]
pub enum DecoderSel {
    Spa,
    MsaFloat,
    MsaFixed(QuantScheme),
    /// The cycle-accurate architecture simulator (trace disabled).
    Arch { p: usize, scheme: QuantScheme },
}

impl DecoderSel {
    pub fn parse(algo: &str, scheme: QuantScheme, p: usize) -> Result<Self> {
        match algo {
            "spa" => Ok(Self::Spa),
            "msa" | "msa-float" => Ok(Self::MsaFloat),
            "msa-fixed" => Ok(Self::MsaFixed(scheme)),
            "arch" => Ok(Self::Arch { p, scheme }),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm `{other}` (expected spa, msa, msa-fixed or arch)"
            ))),
        }
    }
}

/// One measured point of an error-rate curve.
#[derive(Debug, Clone, Copy)]
pub struct ErrorRatePoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    /// 95% normal-approximation half-width on the FER.
    pub ci95: f64,
}

impl ErrorRatePoint {
    fn from_counts(ebn0_db: f64, k: usize, frames: u64, frame_errors: u64, bit_errors: u64) -> Self {
        let fer = frame_errors as f64 / frames as f64;
        let ber = bit_errors as f64 / (frames as f64 * k as f64);
        let ci95 = 1.96 * (fer * (1.0 - fer) / frames as f64).sqrt();
        Self {
            ebn0_db,
            frames,
            frame_errors,
            bit_errors,
            fer,
            ber,
            ci95,
        }
    }
}

enum Worker {
    Ref(ScDecoder),
    Arch(Box<Simulator>, QuantScheme),
}

impl Worker {
    fn new(code: &PolarCode, sel: &DecoderSel) -> Self {
        match *sel {
            DecoderSel::Spa => Worker::Ref(ScDecoder::new(DecodeAlgo::SpaFloat)),
            DecoderSel::MsaFloat => Worker::Ref(ScDecoder::new(DecodeAlgo::MsaFloat)),
            DecoderSel::MsaFixed(s) => Worker::Ref(ScDecoder::new(DecodeAlgo::MsaFixed(s))),
            DecoderSel::Arch { p, scheme } => {
                let cfg = ArchConfig::new(p, scheme, code.clone())
                    .expect("architecture configuration validated by caller");
                Worker::Arch(
                    Box::new(Simulator::new(cfg).expect("valid configuration")),
                    scheme,
                )
            }
        }
    }

    fn decode(&mut self, code: &PolarCode, llrs: &[f64]) -> Vec<u8> {
        match self {
            Worker::Ref(dec) => dec.decode(code, llrs).expect("frame sized to code"),
            Worker::Arch(sim, scheme) => {
                let q: Vec<_> = llrs
                    .iter()
                    .map(|&y| quantize_channel(y, scheme).expect("finite LLR"))
                    .collect();
                sim.run(&q).expect("frame sized to code").u_hat
            }
        }
    }
}

/// Runs one Eb/N0 point until the stop rule fires. Frame and bit errors are
/// counted on information positions against the transmitted bits.
pub fn run_point(
    code: &PolarCode,
    sel: &DecoderSel,
    channel: &ChannelConfig,
    stop: &StopRule,
) -> Result<ErrorRatePoint> {
    if let DecoderSel::Arch { p, scheme } = sel {
        ArchConfig::new(*p, *scheme, code.clone())?.validate()?;
    }
    if code.k() == 0 {
        return Err(Error::InvalidParameter(
            "error rates need at least one information bit".into(),
        ));
    }
    let mut frames = 0u64;
    let mut frame_errors = 0u64;
    let mut bit_errors = 0u64;
    while frames < stop.max_frames
        && (frame_errors < stop.min_frame_errors || frames == 0)
    {
        let round = ROUND_FRAMES.min(stop.max_frames - frames);
        let (fe, be) = (frames..frames + round)
            .into_par_iter()
            .map_init(
                || Worker::new(code, sel),
                |worker, i| {
                    let (info, llrs) = gen_frame(code, channel, i);
                    let u_hat = worker.decode(code, &llrs);
                    let info_hat = code.extract_info(&u_hat).expect("estimate sized to code");
                    let bits = info
                        .iter()
                        .zip(&info_hat)
                        .filter(|(a, b)| a != b)
                        .count() as u64;
                    ((bits > 0) as u64, bits)
                },
            )
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        frames += round;
        frame_errors += fe;
        bit_errors += be;
    }
    Ok(ErrorRatePoint::from_counts(
        channel.ebn0_db,
        code.k(),
        frames,
        frame_errors,
        bit_errors,
    ))
}

/// Sweep configuration, loadable from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: u32,
    pub k: usize,
    #[serde(default = "default_design")]
    pub design_param: f64,
    /// Optional frozen-mask file overriding the built-in construction.
    #[serde(default)]
    pub mask_file: Option<String>,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_qi")]
    pub qi: u8,
    #[serde(default = "default_qic")]
    pub qic: u8,
    #[serde(default = "default_qf")]
    pub qf: u8,
    pub ebn0_list: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_min_frame_errors")]
    pub min_frame_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_algo")]
    pub algo: String,
    /// Worker threads; the default uses every core. Results do not depend
    /// on this value.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_design() -> f64 {
    0.5
}
fn default_p() -> usize {
    64
}
fn default_qi() -> u8 {
    6
}
fn default_qic() -> u8 {
    3
}
fn default_qf() -> u8 {
    2
}
fn default_seed() -> u64 {
    1
}
fn default_min_frame_errors() -> u64 {
    100
}
fn default_max_frames() -> u64 {
    10_000_000
}
fn default_algo() -> String {
    "msa-fixed".into()
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn scheme(&self) -> Result<QuantScheme> {
        QuantScheme::new(self.qi, self.qic, self.qf)
    }

    pub fn build_code(&self) -> Result<PolarCode> {
        match &self.mask_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::MaskFormat(format!("cannot read {path}: {e}"))
                })?;
                PolarCode::load_frozen_mask(&text)
            }
            None => PolarCode::construct(self.n, self.k, self.design_param),
        }
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            min_frame_errors: self.min_frame_errors,
            max_frames: self.max_frames,
        }
    }
}

/// Runs the configured Eb/N0 grid and returns one point per entry.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<ErrorRatePoint>> {
    let code = cfg.build_code()?;
    let scheme = cfg.scheme()?;
    let sel = DecoderSel::parse(&cfg.algo, scheme, cfg.p)?;
    let stop = cfg.stop_rule();
    let run = || -> Result<Vec<ErrorRatePoint>> {
        cfg.ebn0_list
            .iter()
            .map(|&ebn0| {
                let chan = ChannelConfig::new(ebn0, code.rate(), cfg.seed)?;
                run_point(&code, &sel, &chan, &stop)
            })
            .collect()
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Measures one code under several quantization schemes on a shared grid.
pub fn compare_quantization(
    code: &PolarCode,
    schemes: &[QuantScheme],
    ebn0_list: &[f64],
    seed: u64,
    stop: &StopRule,
) -> Result<Vec<(QuantScheme, Vec<ErrorRatePoint>)>> {
    schemes
        .iter()
        .map(|&scheme| {
            let sel = DecoderSel::MsaFixed(scheme);
            let points = ebn0_list
                .iter()
                .map(|&ebn0| {
                    let chan = ChannelConfig::new(ebn0, code.rate(), seed)?;
                    run_point(code, &sel, &chan, stop)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((scheme, points))
        })
        .collect()
}

/// CSV with the canonical header, one row per point.
pub fn points_to_csv(points: &[ErrorRatePoint]) -> String {
    let mut out = String::from("ebn0_db,frames,frame_errors,bit_errors,fer,ber,ci95\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{:.6e},{:.6e},{:.6e}",
            p.ebn0_db, p.frames, p.frame_errors, p.bit_errors, p.fer, p.ber, p.ci95
        )
        .unwrap();
    }
    out
}

/// Same rows in gnuplot-friendly whitespace form.
pub fn points_to_gnuplot(points: &[ErrorRatePoint]) -> String {
    let mut out = String::from("# ebn0_db fer ber ci95 frames\n");
    for p in points {
        writeln!(
            out,
            "{} {:.6e} {:.6e} {:.6e} {}",
            p.ebn0_db, p.fer, p.ber, p.ci95, p.frames
        )
        .unwrap();
    }
    out
}

/// CSV for a quantization comparison (scheme column prepended).
pub fn comparison_to_csv(rows: &[(QuantScheme, Vec<ErrorRatePoint>)]) -> String {
    let mut out = String::from("scheme,ebn0_db,frames,frame_errors,bit_errors,fer,ber,ci95\n");
    for (scheme, points) in rows {
        for p in points {
            writeln!(
                out,
                "\"{}\",{},{},{},{},{:.6e},{:.6e},{:.6e}",
                scheme, p.ebn0_db, p.frames, p.frame_errors, p.bit_errors, p.fer, p.ber, p.ci95
            )
            .unwrap();
        }
    }
    out
}

/// Log-domain interpolation of the Eb/N0 at which a curve crosses `fer`.
/// Points must bracket the target; used for quantization-gap measurements.
pub fn interpolate_ebn0_at_fer(points: &[ErrorRatePoint], fer: f64) -> Option<f64> {
    for pair in points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if (a.fer >= fer && b.fer <= fer) || (a.fer <= fer && b.fer >= fer) {
            if a.fer == b.fer {
                return Some(a.ebn0_db);
            }
            let t = (fer.ln() - a.fer.ln()) / (b.fer.ln() - a.fer.ln());
            return Some(a.ebn0_db + t * (b.ebn0_db - a.ebn0_db));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_stop(fe: u64, frames: u64) -> StopRule {
        StopRule {
            min_frame_errors: fe,
            max_frames: frames,
        }
    }

    #[test]
    fn rate_one_noiseless_has_zero_errors() {
        let code = PolarCode::construct(4, 16, 0.5).unwrap();
        let chan = ChannelConfig::new(80.0, 1.0, 3).unwrap();
        let p = run_point(&code, &DecoderSel::MsaFloat, &chan, &quick_stop(10, 200)).unwrap();
        assert_eq!(p.frame_errors, 0);
        assert_eq!(p.bit_errors, 0);
        assert_eq!(p.frames, 200);
        assert_eq!(p.fer, 0.0);
    }

    #[test]
    fn fer_bounds_ber_and_counts_are_consistent() {
        let code = PolarCode::construct(7, 64, 0.5).unwrap();
        let chan = ChannelConfig::new(1.0, code.rate(), 9).unwrap();
        for sel in [
            DecoderSel::Spa,
            DecoderSel::MsaFloat,
            DecoderSel::MsaFixed(QuantScheme::new(6, 3, 2).unwrap()),
        ] {
            let p = run_point(&code, &sel, &chan, &quick_stop(50, 4096)).unwrap();
            assert!(p.fer >= p.ber, "{sel:?}: fer {} < ber {}", p.fer, p.ber);
            assert!(p.frame_errors > 0);
            assert_eq!(p.fer, p.frame_errors as f64 / p.frames as f64);
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let toml = r#"
            n = 8
            k = 128
            ebn0_list = [1.0, 2.0]
            seed = 77
            min_frame_errors = 40
            max_frames = 4096
            algo = "msa-fixed"
        "#;
        let mut cfg = SweepConfig::from_toml(toml).unwrap();
        cfg.threads = Some(1);
        let a = points_to_csv(&sweep(&cfg).unwrap());
        cfg.threads = Some(4);
        let b = points_to_csv(&sweep(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn statistical_orderings_hold() {
        let code = PolarCode::construct(8, 128, 0.5).unwrap();
        let stop = quick_stop(100, 20_000);
        let mk = |e| ChannelConfig::new(e, code.rate(), 5).unwrap();
        let spa = run_point(&code, &DecoderSel::Spa, &mk(1.5), &stop).unwrap();
        let msa = run_point(&code, &DecoderSel::MsaFloat, &mk(1.5), &stop).unwrap();
        assert!(spa.fer <= msa.fer, "SPA {} vs MSA {}", spa.fer, msa.fer);

        let lo = run_point(&code, &DecoderSel::MsaFloat, &mk(1.0), &stop).unwrap();
        let hi = run_point(&code, &DecoderSel::MsaFloat, &mk(2.0), &stop).unwrap();
        assert!(hi.fer < lo.fer, "FER must fall with Eb/N0");
    }

    #[test]
    fn empty_grid_gives_empty_outputs() {
        let cfg = SweepConfig::from_toml("n = 3\nk = 4\nebn0_list = []\n").unwrap();
        let points = sweep(&cfg).unwrap();
        assert!(points.is_empty());
        assert_eq!(
            points_to_csv(&points),
            "ebn0_db,frames,frame_errors,bit_errors,fer,ber,ci95\n"
        );
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(SweepConfig::from_toml("n = 3\nk = 4\nebn0_list = []\nbogus = 1\n").is_err());
    }

    #[test]
    fn interpolation_brackets_target() {
        let mk = |e, fer| ErrorRatePoint {
            ebn0_db: e,
            frames: 1000,
            frame_errors: (fer * 1000.0) as u64,
            bit_errors: 0,
            fer,
            ber: 0.0,
            ci95: 0.0,
        };
        let curve = [mk(1.5, 5e-2), mk(1.75, 2e-3)];
        let x = interpolate_ebn0_at_fer(&curve, 1e-2).unwrap();
        assert!(x > 1.5 && x < 1.75, "got {x}");
        assert!(interpolate_ebn0_at_fer(&curve, 0.5).is_none());
    }
}
