//! Handover delay and hop count of each technique, expressed as the list of
//! signaling legs on the handover's critical path. The analytical model sums
//! the legs; the simulator samples them.

use std::fmt;
use std::str::FromStr;

use crate::message::LinkClass;
use crate::technique::Technique;
use crate::topology::Topology;

/// Selects between the reference handover formulas and a corrected variant.
///
/// The only difference is `notactive_2MAG`, whose reference delay lacks the
/// `2 * t_am` term its own hop count includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum FormulaMode {
    #[default]
    Verbatim,
    Corrected,
}

impl FormulaMode {
    pub fn from_corrected(corrected: bool) -> Self {
        if corrected {
            FormulaMode::Corrected
        } else {
            FormulaMode::Verbatim
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FormulaMode::Verbatim => "verbatim",
            FormulaMode::Corrected => "corrected",
        }
    }
}

impl fmt::Display for FormulaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "verbatim" => Ok(FormulaMode::Verbatim),
            "corrected" => Ok(FormulaMode::Corrected),
            other => Err(format!("unknown formula mode `{other}`")),
        }
    }
}

/// One message on the handover path: its mean one-way delay and hop count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub link: LinkClass,
    pub delay_ms: f64,
    pub hops: u32,
}

/// Critical-path legs of `technique` over `topology`.
pub fn handover_legs(technique: Technique, topology: &Topology, mode: FormulaMode) -> Vec<Leg> {
    let radio = Leg {
        link: LinkClass::MnMag,
        delay_ms: topology.radio_delay(),
        hops: topology.n_mn_mag,
    };
    let core = Leg {
        link: LinkClass::MagLma,
        delay_ms: topology.t_am,
        hops: topology.n_mag_lma,
    };
    let inter_lma = Leg {
        link: LinkClass::LmaLma,
        delay_ms: topology.t_pn,
        hops: topology.n_lma_lma,
    };
    // Hops counted by the reference notactive_2MAG formula without a delay term.
    let uncounted_core = Leg {
        delay_ms: 0.0,
        ..core
    };

    let mut legs = Vec::with_capacity(8);
    let mut add = |leg: Leg, n: usize| legs.extend(std::iter::repeat_n(leg, n));
    match technique {
        Technique::ActiveDiff => add(core, 4),
        Technique::NotactiveCom | Technique::Notactive1Mag => {
            add(radio, 2);
            add(core, 4);
        }
        Technique::NotactiveDiff => {
            add(radio, 2);
            add(core, 6);
        }
        Technique::NotactiveComBlock
        | Technique::NotactiveDiffBlock
        | Technique::Notactive1MagBlock
        | Technique::Notactive2MagBlock => {
            add(radio, 2);
            add(core, 2);
        }
        Technique::Active2Mag => {
            add(inter_lma, 2);
            add(core, 4);
        }
        Technique::Notactive2Mag => {
            add(radio, 2);
            add(core, 4);
            match mode {
                FormulaMode::Verbatim => add(uncounted_core, 2),
                FormulaMode::Corrected => add(core, 2),
            }
        }
    }
    legs
}

/// Total handover delay (ms) and hop count along the handover path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverComponents {
    pub d_ho: f64,
    pub n_ho: u32,
}

pub fn handover_components(technique: Technique, topology: &Topology) -> HandoverComponents {
    handover_components_with(technique, topology, FormulaMode::Verbatim)
}

pub fn handover_components_with(
    technique: Technique,
    topology: &Topology,
    mode: FormulaMode,
) -> HandoverComponents {
    handover_legs(technique, topology, mode).iter().fold(
        HandoverComponents { d_ho: 0.0, n_ho: 0 },
        |acc, leg| HandoverComponents {
            d_ho: acc.d_ho + leg.delay_ms,
            n_ho: acc.n_ho + leg.hops,
        },
    )
}
