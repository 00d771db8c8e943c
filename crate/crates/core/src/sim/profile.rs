use super::config::{Configuration, Window};
use crate::error::Result;

/// A height profile on a window together with a configuration whose
/// dynamics drives it.
#[derive(Debug, Clone)]
pub struct HeightProfile {
    pub config: Configuration,
    /// `values[i]` is the profile at site `window.lo + i`.
    pub values: Vec<i64>,
}

impl HeightProfile {
    pub fn at(&self, x: i64) -> Option<i64> {
        let w = self.config.window();
        w.contains(x).then(|| self.values[(x - w.lo) as usize])
    }
}

/// The two one-sided profiles bracketing a shock started from `config`:
///
/// * `h^-(0, x) = h(0, x)` for `x <= 0` and `|x|` for `x >= 0` (right half emptied),
/// * `h~^+(0, x) = h(0, x) - 2` for `x >= 1` and `|x|` for `x <= 0` (left half filled,
///   the filled origin standing for the second class particle).
///
/// The `-2` on the right of `h~^+` is an anchoring convention; the attached
/// configuration has the usual unit-step height, which differs from `values`
/// by that constant for `x >= 1`.
pub fn modified_heights(config: &Configuration) -> Result<(HeightProfile, HeightProfile)> {
    let w: Window = config.window();
    let mut minus = config.occupation().to_vec();
    let mut plus = config.occupation().to_vec();
    for x in w.lo..=w.hi {
        let i = (x - w.lo) as usize;
        if x >= 1 {
            minus[i] = 0;
        } else {
            plus[i] = 1;
        }
    }
    let minus = Configuration::from_occupation(w, minus)?;
    let plus = Configuration::from_occupation(w, plus)?;
    let mut vm = Vec::with_capacity(w.len());
    let mut vp = Vec::with_capacity(w.len());
    for x in w.lo..=w.hi {
        let h = config.height(x)? - 2 * config.crossings();
        vm.push(if x <= 0 { h } else { x });
        vp.push(if x >= 1 { h - 2 } else { -x });
    }
    Ok((HeightProfile { config: minus, values: vm }, HeightProfile { config: plus, values: vp }))
}
