//! Built-in configurations for the five figure reports.

use crate::config::{parse_config, ConfigError, RunConfig};

pub const NAMES: &[&str] = &["fig1a", "fig1b", "fig2", "fig3", "fig4"];

pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1a" => {
            "command = report\nfigure = fig1a\n\
             [model]\nmodel = cusp\npath = v1\nK = 0.01\n\
             [grid]\nlambda_min = -0.6\nlambda_max = 0.6\nlambda_steps = 201\n\
             [solver]\nnum_levels = 60\n"
        }
        "fig1b" => {
            "command = report\nfigure = fig1b\n\
             [model]\nmodel = cusp\npath = v2\nK = 0.01\n\
             [grid]\nlambda_min = -1\nlambda_max = 1\nlambda_steps = 201\n\
             [solver]\nnum_levels = 60\n"
        }
        "fig2" => {
            "command = report\nfigure = fig2\n\
             [model]\nmodel = cusp\npath = v1\nK = 0.01\n\
             [grid]\nlambda_min = -0.3\nlambda_max = 0.3\nlambda_steps = 121\nlevels = 4\npoints = 401\nextent = 1.6\n\
             [solver]\nnum_levels = 10\n\
             [output]\nnote = wave functions of the fifth level (index 4) at every grid λ\n"
        }
        "fig3" => {
            "command = report\nfigure = fig3\n\
             [model]\nmodel = collective\npath = collective\nK = 0.001\n\
             [grid]\nlambda_min = 0.18\nlambda_max = 0.32\nlambda_steps = 29\n\
             [solver]\nnum_levels = 15\ntol = 1e-5\n\
             [output]\nnote = downscaled: λ in [0.18, 0.32] around the critical point and the upper spinodal, lowest 15 symmetric levels at tolerance 1e-5; below λ = 0.17 the spectrum at K = 0.001 needs more than the 2D basis cap\n"
        }
        "fig4" => {
            "command = report\nfigure = fig4\n\
             [model]\nmodel = collective\npath = collective\n\
             [grid]\nlambdas = 0.22,0.25,0.5\ne_max = 0.015\nbin_width = 0.0005\n\
             [solver]\ndensity_method = counting\ndensity_target = 800\ncap_2d = 100000\n\
             [output]\nnote = downscaled: K chosen for about 800 levels below E = 0.015 (above the smallest K of the figure range), three λ panels\n"
        }
        _ => return None,
    })
}

pub fn preset(name: &str) -> Option<Result<RunConfig, ConfigError>> {
    preset_text(name).map(parse_config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for n in NAMES {
            let c = preset(n).unwrap().unwrap();
            assert_eq!(c.figure.unwrap().to_string(), *n);
        }
        assert!(preset("fig5").is_none());
    }
}
