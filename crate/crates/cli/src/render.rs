//! Static tree diagrams: indented text or SVG arcs over the tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use scud_core::{Head, NodeId, Sentence, Token};

fn label(t: &Token) -> String {
    let rel = t
        .deprel
        .as_ref()
        .map_or_else(|| "_".to_owned(), ToString::to_string);
    format!("{} {} ({rel})", t.id, t.form)
}

fn children(s: &Sentence) -> HashMap<Head, Vec<&Token>> {
    let mut out: HashMap<Head, Vec<&Token>> = HashMap::new();
    for t in &s.tokens {
        out.entry(t.head).or_default().push(t);
    }
    out
}

/// Indented tree under a `ROOT` line; unattached nodes and nodes not
/// reachable from ROOT are listed at the end.
pub fn ascii(s: &Sentence) -> String {
    let mut out = String::new();
    for c in &s.comments {
        let _ = writeln!(out, "{c}");
    }
    out.push_str("ROOT\n");
    let kids = children(s);
    let mut seen = BTreeSet::new();
    fn walk(
        head: Head,
        prefix: &str,
        kids: &HashMap<Head, Vec<&Token>>,
        seen: &mut BTreeSet<NodeId>,
        out: &mut String,
    ) {
        let Some(list) = kids.get(&head) else { return };
        for (i, t) in list.iter().enumerate() {
            if !seen.insert(t.id) {
                continue;
            }
            let last = i + 1 == list.len();
            let _ = writeln!(
                out,
                "{prefix}{}{}",
                if last { "└─ " } else { "├─ " },
                label(t)
            );
            let deeper = format!("{prefix}{}", if last { "   " } else { "│  " });
            walk(Head::Node(t.id), &deeper, kids, seen, out);
        }
    }
    walk(Head::Root, "", &kids, &mut seen, &mut out);
    let rest: Vec<String> = s
        .tokens
        .iter()
        .filter(|t| !seen.contains(&t.id))
        .map(label)
        .collect();
    if !rest.is_empty() {
        let _ = writeln!(out, "unattached: {}", rest.join(", "));
    }
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const CHAR_WIDTH: usize = 8;
const PAD: usize = 16;
const LEVEL: usize = 18;

/// Words on a baseline with one arc per dependency, drawn above the
/// words; the ROOT attachment is a vertical arrow.
pub fn svg(s: &Sentence) -> String {
    let tokens = &s.tokens;
    let mut centers = Vec::with_capacity(tokens.len());
    let mut x = PAD;
    for t in tokens {
        let upos = t.upos.map_or("", |u| u.as_str());
        let w = t.form.chars().count().max(upos.len()).max(2) * CHAR_WIDTH + PAD;
        centers.push(x + w / 2);
        x += w;
    }
    let width = x + PAD;
    let index: BTreeMap<NodeId, usize> =
        tokens.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
    let arcs: Vec<(usize, usize, String)> = tokens
        .iter()
        .enumerate()
        .filter_map(|(d, t)| {
            let rel = t
                .deprel
                .as_ref()
                .map_or_else(|| "_".to_owned(), ToString::to_string);
            match t.head {
                Head::Node(h) => index.get(&h).map(|&h| (h, d, rel)),
                _ => None,
            }
        })
        .collect();
    let span = arcs
        .iter()
        .map(|(h, d, _)| h.abs_diff(*d))
        .max()
        .unwrap_or(0);
    let top = PAD + LEVEL * (span + 2);
    let baseline = top + 2 * LEVEL;
    let height = baseline + 2 * LEVEL;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="13">"#
    );
    if let Some(id) = s.sent_id() {
        let _ = writeln!(out, "  <title>{}</title>", escape(id));
    }
    for (i, t) in tokens.iter().enumerate() {
        let style = if t.id.is_empty_node() {
            r#" font-style="italic""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{baseline}" text-anchor="middle"{style}>{}</text>"#,
            centers[i],
            escape(&t.form)
        );
        if let Some(u) = t.upos {
            let _ = writeln!(
                out,
                r##"  <text x="{}" y="{}" text-anchor="middle" fill="#666" font-size="10">{}</text>"##,
                centers[i],
                baseline + LEVEL,
                u.as_str()
            );
        }
    }
    for (h, d, rel) in &arcs {
        let (x1, x2) = (centers[*h], centers[*d]);
        let lift = LEVEL * (h.abs_diff(*d) + 1);
        let y = baseline - LEVEL;
        let peak = y - lift;
        let _ = writeln!(
            out,
            r#"  <path d="M {x1} {y} C {x1} {peak}, {x2} {peak}, {x2} {y}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"  <path d="M {} {} L {x2} {y} L {} {}" fill="none" stroke="black"/>"#,
            x2 - 3,
            y - 6,
            x2 + 3,
            y - 6
        );
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
            (x1 + x2) / 2,
            y - lift * 3 / 4 - 2,
            escape(rel)
        );
    }
    for (i, t) in tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.head == Head::Root)
    {
        let x = centers[i];
        let y = baseline - LEVEL;
        let _ = writeln!(out, r#"  <path d="M {x} {PAD} L {x} {y}" stroke="black"/>"#);
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="11">{}</text>"#,
            x + 4,
            PAD + 10,
            escape(
                &t.deprel
                    .as_ref()
                    .map_or_else(|| "root".to_owned(), ToString::to_string)
            )
        );
    }
    out.push_str("</svg>\n");
    out
}
