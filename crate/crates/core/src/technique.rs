//! The ten evaluated flow-mobility techniques.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Environment {
    SingleLma,
    MultiLma,
}

impl Environment {
    pub fn name(self) -> &'static str {
        match self {
            Environment::SingleLma => "single",
            Environment::MultiLma => "multi",
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Environment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" | "single-lma" | "singlelma" => Ok(Environment::SingleLma),
            "multi" | "multi-lma" | "multilma" => Ok(Environment::MultiLma),
            other => Err(format!("unknown environment `{other}` (single|multi)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Technique {
    /// All interfaces active, flows on unique prefixes.
    ActiveDiff,
    /// Interfaces power on, flows share one prefix.
    NotactiveCom,
    /// Interfaces power on, flows on unique prefixes.
    NotactiveDiff,
    NotactiveComBlock,
    NotactiveDiffBlock,
    /// All interfaces active, LMAs behind different MAGs.
    Active2Mag,
    /// Interfaces power on, LMAs share one MAG.
    Notactive1Mag,
    /// Interfaces power on, LMAs behind different MAGs.
    Notactive2Mag,
    Notactive1MagBlock,
    Notactive2MagBlock,
}

impl Technique {
    pub const ALL: [Technique; 10] = [
        Technique::ActiveDiff,
        Technique::NotactiveCom,
        Technique::NotactiveDiff,
        Technique::NotactiveComBlock,
        Technique::NotactiveDiffBlock,
        Technique::Active2Mag,
        Technique::Notactive1Mag,
        Technique::Notactive2Mag,
        Technique::Notactive1MagBlock,
        Technique::Notactive2MagBlock,
    ];

    pub fn environment(self) -> Environment {
        match self {
            Technique::ActiveDiff
            | Technique::NotactiveCom
            | Technique::NotactiveDiff
            | Technique::NotactiveComBlock
            | Technique::NotactiveDiffBlock => Environment::SingleLma,
            _ => Environment::MultiLma,
        }
    }

    /// Techniques of one environment, in canonical order.
    pub fn in_environment(env: Environment) -> impl Iterator<Item = Technique> {
        Technique::ALL
            .into_iter()
            .filter(move |t| t.environment() == env)
    }

    pub fn is_block(self) -> bool {
        matches!(
            self,
            Technique::NotactiveComBlock
                | Technique::NotactiveDiffBlock
                | Technique::Notactive1MagBlock
                | Technique::Notactive2MagBlock
        )
    }

    /// Whether interfaces are powered on during the handover (radio access involved).
    pub fn is_power_on(self) -> bool {
        !matches!(self, Technique::ActiveDiff | Technique::Active2Mag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Technique::ActiveDiff => "active_diff",
            Technique::NotactiveCom => "notactive_com",
            Technique::NotactiveDiff => "notactive_diff",
            Technique::NotactiveComBlock => "notactive_com_block",
            Technique::NotactiveDiffBlock => "notactive_diff_block",
            Technique::Active2Mag => "active_2MAG",
            Technique::Notactive1Mag => "notactive_1MAG",
            Technique::Notactive2Mag => "notactive_2MAG",
            Technique::Notactive1MagBlock => "notactive_1MAG_block",
            Technique::Notactive2MagBlock => "notactive_2MAG_block",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().replace('-', "_");
        Technique::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(&wanted))
            .ok_or_else(|| format!("unknown technique `{s}`"))
    }
}
