//! Emoji detection, run splitting, and the emoji description map.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{io_err, Error, Result};

/// Unicode emoji codepoint ranges (inclusive). ASCII is deliberately excluded
/// even though `#`, `*`, and the digits carry the Emoji property: in tweet
/// text they are always ordinary characters unless combined into keycaps.
const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x00A9, 0x00A9),   // copyright
    (0x00AE, 0x00AE),   // registered
    (0x203C, 0x203C),   // double exclamation
    (0x2049, 0x2049),   // exclamation question
    (0x2122, 0x2122),   // trade mark
    (0x2139, 0x2139),   // information
    (0x2194, 0x2199),   // arrows
    (0x21A9, 0x21AA),   // hooked arrows
    (0x231A, 0x231B),   // watch, hourglass
    (0x2328, 0x2328),   // keyboard
    (0x23CF, 0x23CF),   // eject
    (0x23E9, 0x23F3),   // media controls
    (0x23F8, 0x23FA),   // pause, stop, record
    (0x24C2, 0x24C2),   // circled M
    (0x25AA, 0x25AB),   // small squares
    (0x25B6, 0x25B6),   // play
    (0x25C0, 0x25C0),   // reverse
    (0x25FB, 0x25FE),   // medium squares
    (0x2600, 0x27BF),   // misc symbols, dingbats
    (0x2934, 0x2935),   // curved arrows
    (0x2B05, 0x2B07),   // heavy arrows
    (0x2B1B, 0x2B1C),   // large squares
    (0x2B50, 0x2B50),   // star
    (0x2B55, 0x2B55),   // heavy circle
    (0x3030, 0x3030),   // wavy dash
    (0x303D, 0x303D),   // part alternation mark
    (0x3297, 0x3297),   // circled congratulation
    (0x3299, 0x3299),   // circled secret
    (0x1F000, 0x1F0FF), // mahjong, dominoes, cards
    (0x1F170, 0x1F251), // enclosed characters
    (0x1F300, 0x1F5FF), // misc symbols and pictographs
    (0x1F600, 0x1F64F), // emoticons
    (0x1F680, 0x1F6FF), // transport
    (0x1F7E0, 0x1F7FF), // colored shapes
    (0x1F900, 0x1F9FF), // supplemental symbols
    (0x1FA70, 0x1FAFF), // extended symbols
    (0x1F1E6, 0x1F1FF), // regional indicators
];

const ZWJ: char = '\u{200D}';
const VS15: char = '\u{FE0E}';
const VS16: char = '\u{FE0F}';
const KEYCAP: char = '\u{20E3}';

pub(crate) fn is_emoji_char(c: char) -> bool {
    let cp = c as u32;
    if cp < 0x80 {
        return false;
    }
    EMOJI_RANGES.iter().any(|&(lo, hi)| lo <= cp && cp <= hi)
}

/// Characters that bind to the preceding emoji: variation selectors,
/// zero-width joiners, skin-tone modifiers, and the keycap combiner.
pub(crate) fn is_emoji_component(c: char) -> bool {
    matches!(c, ZWJ | VS15 | VS16 | KEYCAP) || ('\u{1F3FB}'..='\u{1F3FF}').contains(&c)
}

fn is_regional_indicator(c: char) -> bool {
    ('\u{1F1E6}'..='\u{1F1FF}').contains(&c)
}

/// Split a contiguous emoji run into individual emoji.
///
/// Variation selectors, skin tones, and keycap combiners stay attached to the
/// preceding character; a zero-width joiner glues the next emoji into the same
/// unit; a pair of regional indicators forms one flag.
pub fn split_emoji_run(run: &str) -> Vec<String> {
    let chars: Vec<char> = run.chars().collect();
    let mut units = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let mut unit = String::new();
        unit.push(chars[i]);
        let first = chars[i];
        i += 1;
        if is_regional_indicator(first) && i < chars.len() && is_regional_indicator(chars[i]) {
            unit.push(chars[i]);
            i += 1;
        } else {
            loop {
                // trailing components
                while i < chars.len() && chars[i] != ZWJ && is_emoji_component(chars[i]) {
                    unit.push(chars[i]);
                    i += 1;
                }
                // joiner sequences continue the same unit
                if i + 1 < chars.len() && chars[i] == ZWJ && is_emoji_char(chars[i + 1]) {
                    unit.push(chars[i]);
                    unit.push(chars[i + 1]);
                    i += 2;
                } else {
                    break;
                }
            }
        }
        units.push(unit);
    }
    units
}

/// Mapping from a single emoji (possibly multi-codepoint) to its description.
#[derive(Debug, Clone, Default)]
pub struct EmojiMap {
    entries: HashMap<String, String>,
}

impl EmojiMap {
    pub fn empty() -> EmojiMap {
        EmojiMap::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, emoji: &str) -> Option<&str> {
        self.entries.get(emoji).map(String::as_str)
    }

    pub fn insert(&mut self, emoji: &str, description: &str) -> Result<()> {
        if description.trim().is_empty() {
            return Err(Error::Invalid(format!("empty description for emoji '{emoji}'")));
        }
        if self.entries.contains_key(emoji) {
            return Err(Error::Invalid(format!("duplicate emoji key '{emoji}'")));
        }
        self.entries.insert(emoji.to_string(), description.to_lowercase());
        Ok(())
    }
}

/// Load an emoji description map from a two-column TSV (emoji, description).
pub fn load_emoji_map(path: &Path) -> Result<EmojiMap> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut map = EmojiMap::empty();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("expected 2 tab-separated columns, found {}", cols.len()),
            });
        }
        map.insert(cols[0], cols[1]).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: line_no,
            msg: e.to_string(),
        })?;
    }
    Ok(map)
}
