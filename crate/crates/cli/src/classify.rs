use std::fmt::Write as _;

use spingeo_core::io::{fmt_f64, parse_json, read_text, write_text, SpinorListDoc};
use spingeo_core::lightfront::{classify, majorana_check, FrontKind};
use spingeo_core::Result;

use crate::{Outcome, RunConfig};

pub const HEADER: &str =
    "# index,kind,density_sq,both_chiralities,sin_angle_limit,alternate_limit,majorana_residual,is_majorana\n";

fn kind_name(k: FrontKind) -> &'static str {
    match k {
        FrontKind::Regular => "regular",
        FrontKind::LightFrontLeft => "light_front_left",
        FrontKind::LightFrontRight => "light_front_right",
        FrontKind::Zero => "zero",
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let doc: SpinorListDoc = parse_json(&read_text(&config.input)?)?;
    let mut out = String::from(HEADER);
    for (i, psi) in doc.spinors().iter().enumerate() {
        let c = classify(psi);
        let m = majorana_check(psi);
        let (limit, alternate) = match &c.angle_limit {
            Some(a) => (fmt_f64(a.sin_angle), a.alternate.map_or(String::new(), fmt_f64)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{i},{},{},{},{limit},{alternate},{},{}",
            kind_name(c.kind),
            fmt_f64(c.density_sq),
            c.both_chiralities,
            fmt_f64(m.residual),
            m.is_majorana
        );
    }
    write_text(&config.output, &out)?;
    Ok(Outcome::Pass)
}
