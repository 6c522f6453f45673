//! UI hierarchy documents, text regions and screen signatures.
//!
//! Hierarchy documents follow the uiautomator dump shape: nested elements
//! carrying `class`, `text`, `bounds`, `clickable` and `editable` attributes,
//! optionally wrapped in a `<hierarchy>` element that may declare `activity`,
//! `window`, `width` and `height`.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnapshotError {
    #[error("malformed hierarchy document: {0}")]
    MalformedDocument(String),
    #[error("malformed bounds {0:?}")]
    MalformedBounds(String),
    #[error("hierarchy document contains no elements")]
    EmptyDocument,
    #[error("malformed text region on line {line}: {reason}")]
    MalformedRegion { line: usize, reason: String },
    #[error("screen size must be positive, got {0}x{1}")]
    InvalidScreenSize(u32, u32),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Axis-aligned box in screen pixels, right/bottom exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Bounds {
    pub left: u32,
    pub top: u32,
    pub right: u32,
    pub bottom: u32,
}

impl Bounds {
    pub fn new(left: u32, top: u32, right: u32, bottom: u32) -> Result<Self, SnapshotError> {
        if left > right || top > bottom {
            return Err(SnapshotError::MalformedBounds(format!(
                "[{left},{top}][{right},{bottom}]"
            )));
        }
        Ok(Self {
            left,
            top,
            right,
            bottom,
        })
    }

    pub fn width(&self) -> u32 {
        self.right - self.left
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    /// Center point, rounded down.
    pub fn center(&self) -> (u32, u32) {
        (
            self.left + self.width() / 2,
            self.top + self.height() / 2,
        )
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.left && x < self.right && y >= self.top && y < self.bottom
    }

    pub fn intersection(&self, other: &Bounds) -> Option<Bounds> {
        let left = self.left.max(other.left);
        let top = self.top.max(other.top);
        let right = self.right.min(other.right);
        let bottom = self.bottom.min(other.bottom);
        (left < right && top < bottom).then_some(Bounds {
            left,
            top,
            right,
            bottom,
        })
    }

    /// Parses `[l,t][r,b]`, tolerating surrounding whitespace.
    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        let bad = || SnapshotError::MalformedBounds(text.to_string());
        let s = text.trim();
        let s = s.strip_prefix('[').ok_or_else(bad)?;
        let (first, rest) = s.split_once("][").ok_or_else(bad)?;
        let second = rest.strip_suffix(']').ok_or_else(bad)?;
        let pair = |p: &str| -> Result<(u32, u32), SnapshotError> {
            let (a, b) = p.split_once(',').ok_or_else(bad)?;
            let num = |v: &str| {
                let v = v.trim();
                if v.is_empty() || !v.bytes().all(|c| c.is_ascii_digit()) {
                    return Err(bad());
                }
                v.parse::<u32>().map_err(|_| bad())
            };
            Ok((num(a)?, num(b)?))
        };
        let (l, t) = pair(first)?;
        let (r, b) = pair(second)?;
        Bounds::new(l, t, r, b).map_err(|_| bad())
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{}][{},{}]",
            self.left, self.top, self.right, self.bottom
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UiNode {
    /// Ordinal in document (pre-order) order.
    pub node_id: usize,
    pub class_name: String,
    /// Class of the parent element; empty at the root.
    pub ancestor_class: String,
    pub label: String,
    pub bounds: Bounds,
    pub clickable: bool,
    pub editable: bool,
    pub children: Vec<UiNode>,
}

impl UiNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order traversal, which is also `node_id` order.
    pub fn iter(&self) -> NodeIter<'_> {
        NodeIter { stack: vec![self] }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &UiNode> {
        self.iter().filter(|n| n.is_leaf())
    }

    pub fn node_count(&self) -> usize {
        self.iter().count()
    }

    pub fn find(&self, node_id: usize) -> Option<&UiNode> {
        self.iter().find(|n| n.node_id == node_id)
    }

    /// Reassigns node ids and ancestor classes from the tree shape.
    pub fn renumber(&mut self) {
        fn walk(node: &mut UiNode, parent_class: &str, next: &mut usize) {
            node.node_id = *next;
            *next += 1;
            node.ancestor_class = parent_class.to_string();
            let class = node.class_name.clone();
            for child in &mut node.children {
                walk(child, &class, next);
            }
        }
        let mut next = 0;
        walk(self, "", &mut next);
    }
}

pub struct NodeIter<'a> {
    stack: Vec<&'a UiNode>,
}

impl<'a> Iterator for NodeIter<'a> {
    type Item = &'a UiNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionSource {
    HierarchyLabel,
    ExternalRecognizer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRegion {
    pub text: String,
    pub bounds: Bounds,
    pub source: RegionSource,
}

impl TextRegion {
    /// Returns `None` when the text is blank.
    pub fn new(text: &str, bounds: Bounds, source: RegionSource) -> Option<Self> {
        let text = text.trim();
        (!text.is_empty()).then(|| Self {
            text: text.to_string(),
            bounds,
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiSnapshot {
    /// Root of the hierarchy; `None` for a screen with no elements.
    pub hierarchy: Option<UiNode>,
    pub text_regions: Vec<TextRegion>,
    pub activity: String,
    pub window: String,
    pub captured_at: u64,
    pub screen_size: (u32, u32),
}

impl UiSnapshot {
    pub fn new(
        hierarchy: Option<UiNode>,
        text_regions: Vec<TextRegion>,
        activity: impl Into<String>,
        window: impl Into<String>,
        screen_size: (u32, u32),
    ) -> Result<Self, SnapshotError> {
        if screen_size.0 == 0 || screen_size.1 == 0 {
            return Err(SnapshotError::InvalidScreenSize(screen_size.0, screen_size.1));
        }
        Ok(Self {
            hierarchy,
            text_regions,
            activity: activity.into(),
            window: window.into(),
            captured_at: 0,
            screen_size,
        })
    }

    /// All nodes in document order.
    pub fn nodes(&self) -> impl Iterator<Item = &UiNode> {
        self.hierarchy.iter().flat_map(|root| root.iter())
    }

    pub fn leaves(&self) -> impl Iterator<Item = &UiNode> {
        self.nodes().filter(|n| n.is_leaf())
    }

    pub fn find(&self, node_id: usize) -> Option<&UiNode> {
        self.nodes().find(|n| n.node_id == node_id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes().count()
    }

    pub fn screen_bounds(&self) -> Bounds {
        Bounds {
            left: 0,
            top: 0,
            right: self.screen_size.0,
            bottom: self.screen_size.1,
        }
    }

    /// Reads a hierarchy document and an optional region file from disk.
    pub fn load(hierarchy: &Path, regions: Option<&Path>) -> Result<Self, SnapshotError> {
        let doc = read_to_string(hierarchy)?;
        let parsed = parse_document(&doc)?;
        let text_regions = match regions {
            Some(path) => parse_text_regions(&read_to_string(path)?)?,
            None => Vec::new(),
        };
        parsed.into_snapshot(text_regions)
    }
}

fn read_to_string(path: &Path) -> Result<String, SnapshotError> {
    std::fs::read_to_string(path).map_err(|e| SnapshotError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// A parsed hierarchy document together with the metadata found on the
/// optional `<hierarchy>` wrapper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyDocument {
    pub root: UiNode,
    pub activity: String,
    pub window: String,
    pub screen_size: Option<(u32, u32)>,
}

impl HierarchyDocument {
    /// Builds a snapshot; the screen size falls back to the root's extent.
    pub fn into_snapshot(self, text_regions: Vec<TextRegion>) -> Result<UiSnapshot, SnapshotError> {
        let size = self.screen_size.unwrap_or((
            self.root.bounds.right.max(1),
            self.root.bounds.bottom.max(1),
        ));
        UiSnapshot::new(Some(self.root), text_regions, self.activity, self.window, size)
    }
}

/// 64-bit identity of a screen state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScreenSignature {
    pub activity: String,
    pub window: String,
    pub structure_digest: u64,
}

impl fmt::Display for ScreenSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}#{:016x}",
            self.activity, self.window, self.structure_digest
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Textuality {
    Textual,
    NonTextual,
}

pub fn parse_hierarchy(document: &str) -> Result<UiNode, SnapshotError> {
    parse_document(document).map(|d| d.root)
}

pub fn parse_document(document: &str) -> Result<HierarchyDocument, SnapshotError> {
    enum Frame {
        Wrapper,
        Node(UiNode),
    }

    let mut reader = Reader::from_str(document);
    reader.config_mut().trim_text(true);

    let mut doc = HierarchyDocument {
        root: UiNode::default(),
        activity: String::new(),
        window: String::new(),
        screen_size: None,
    };
    let mut stack: Vec<Frame> = Vec::new();
    let mut roots: Vec<UiNode> = Vec::new();
    let mut top_level_seen = false;

    let push_done = |stack: &mut Vec<Frame>, roots: &mut Vec<UiNode>, node: UiNode| {
        match stack.last_mut() {
            Some(Frame::Node(parent)) => parent.children.push(node),
            Some(Frame::Wrapper) | None => roots.push(node),
        }
    };

    loop {
        let event = reader
            .read_event()
            .map_err(|e| SnapshotError::MalformedDocument(e.to_string()))?;
        match event {
            Event::Start(e) | Event::Empty(e) if stack.is_empty() && top_level_seen => {
                let _ = e;
                return Err(SnapshotError::MalformedDocument(
                    "more than one top-level element".into(),
                ));
            }
            Event::Start(e) if stack.is_empty() && is_wrapper(&e) => {
                top_level_seen = true;
                read_wrapper(&e, &mut doc)?;
                stack.push(Frame::Wrapper);
            }
            Event::Empty(e) if stack.is_empty() && is_wrapper(&e) => {
                top_level_seen = true;
                read_wrapper(&e, &mut doc)?;
            }
            Event::Start(e) => {
                top_level_seen |= stack.is_empty();
                stack.push(Frame::Node(node_from_element(&e)?));
            }
            Event::Empty(e) => {
                top_level_seen |= stack.is_empty();
                let node = node_from_element(&e)?;
                push_done(&mut stack, &mut roots, node);
            }
            Event::End(_) => match stack.pop() {
                Some(Frame::Node(node)) => push_done(&mut stack, &mut roots, node),
                Some(Frame::Wrapper) => {}
                None => {
                    return Err(SnapshotError::MalformedDocument(
                        "unbalanced end tag".into(),
                    ))
                }
            },
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(SnapshotError::MalformedDocument(
            "unterminated element".into(),
        ));
    }
    if roots.len() > 1 {
        return Err(SnapshotError::MalformedDocument(
            "more than one root element".into(),
        ));
    }
    let mut root = roots.pop().ok_or(SnapshotError::EmptyDocument)?;
    root.renumber();
    doc.root = root;
    Ok(doc)
}

fn is_wrapper(e: &BytesStart<'_>) -> bool {
    e.name().as_ref() == b"hierarchy"
}

fn read_wrapper(e: &BytesStart<'_>, doc: &mut HierarchyDocument) -> Result<(), SnapshotError> {
    let mut width = None;
    let mut height = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|e| SnapshotError::MalformedDocument(e.to_string()))?;
        let value = attr
            .unescape_value()
            .map_err(|e| SnapshotError::MalformedDocument(e.to_string()))?;
        let dim = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| SnapshotError::MalformedDocument(format!("bad dimension {v:?}")))
        };
        match attr.key.as_ref() {
            b"activity" => doc.activity = value.into_owned(),
            b"window" => doc.window = value.into_owned(),
            b"width" => width = Some(dim(&value)?),
            b"height" => height = Some(dim(&value)?),
            _ => {}
        }
    }
    if let (Some(w), Some(h)) = (width, height) {
        if w == 0 || h == 0 {
            return Err(SnapshotError::InvalidScreenSize(w, h));
        }
        doc.screen_size = Some((w, h));
    }
    Ok(())
}

fn node_from_element(e: &BytesStart<'_>) -> Result<UiNode, SnapshotError> {
    let mut class_name = String::new();
    let mut label = String::new();
    let mut bounds = None;
    let mut clickable = false;
    let mut editable = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|e| SnapshotError::MalformedDocument(e.to_string()))?;
        let value = attr
            .unescape_value()
            .map_err(|e| SnapshotError::MalformedDocument(e.to_string()))?;
        match attr.key.as_ref() {
            b"class" => class_name = value.into_owned(),
            b"text" => label = value.into_owned(),
            b"bounds" => bounds = Some(Bounds::parse(&value)?),
            b"clickable" => clickable = parse_flag(&value)?,
            b"editable" => editable = Some(parse_flag(&value)?),
            _ => {}
        }
    }
    let bounds = bounds.ok_or_else(|| SnapshotError::MalformedBounds(String::new()))?;
    let editable = editable.unwrap_or_else(|| class_name.ends_with("EditText"));
    Ok(UiNode {
        node_id: 0,
        class_name,
        ancestor_class: String::new(),
        label,
        bounds,
        clickable,
        editable,
        children: Vec::new(),
    })
}

fn parse_flag(value: &str) -> Result<bool, SnapshotError> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(SnapshotError::MalformedDocument(format!(
            "expected true/false, got {other:?}"
        ))),
    }
}

fn escape_attr(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
    out
}

/// Writes a node tree back out as a hierarchy document.
pub fn serialize_hierarchy(root: &UiNode) -> String {
    fn write_node(out: &mut String, node: &UiNode, depth: usize) {
        let indent = "  ".repeat(depth);
        let _ = write!(
            out,
            "{indent}<node class=\"{}\" text=\"{}\" bounds=\"{}\" clickable=\"{}\" editable=\"{}\"",
            escape_attr(&node.class_name),
            escape_attr(&node.label),
            node.bounds,
            node.clickable,
            node.editable
        );
        if node.children.is_empty() {
            out.push_str("/>\n");
        } else {
            out.push_str(">\n");
            for child in &node.children {
                write_node(out, child, depth + 1);
            }
            let _ = writeln!(out, "{indent}</node>");
        }
    }
    let mut out = String::new();
    write_node(&mut out, root, 0);
    out
}

/// Serializes a full snapshot document, wrapper metadata included.
pub fn serialize_document(snapshot: &UiSnapshot) -> String {
    let mut out = format!(
        "<hierarchy activity=\"{}\" window=\"{}\" width=\"{}\" height=\"{}\">\n",
        escape_attr(&snapshot.activity),
        escape_attr(&snapshot.window),
        snapshot.screen_size.0,
        snapshot.screen_size.1
    );
    if let Some(root) = &snapshot.hierarchy {
        for line in serialize_hierarchy(root).lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    out.push_str("</hierarchy>\n");
    out
}

/// Parses `text<TAB>l,t,r,b` records; blank lines and `#` comments are skipped.
pub fn parse_text_regions(text: &str) -> Result<Vec<TextRegion>, SnapshotError> {
    let mut regions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let bad = |reason: &str| SnapshotError::MalformedRegion {
            line,
            reason: reason.to_string(),
        };
        let (content, coords) = raw.rsplit_once('\t').ok_or_else(|| bad("missing tab"))?;
        let nums: Vec<u32> = coords
            .split(',')
            .map(|v| v.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("coordinates must be four non-negative integers"))?;
        let [l, t, r, b] = nums[..] else {
            return Err(bad("expected four coordinates"));
        };
        let bounds = Bounds::new(l, t, r, b).map_err(|_| bad("inverted box"))?;
        let region = TextRegion::new(content, bounds, RegionSource::ExternalRecognizer)
            .ok_or_else(|| bad("empty text"))?;
        regions.push(region);
    }
    Ok(regions)
}

pub fn serialize_text_regions(regions: &[TextRegion]) -> String {
    regions
        .iter()
        .map(|r| {
            format!(
                "{}\t{},{},{},{}\n",
                r.text, r.bounds.left, r.bounds.top, r.bounds.right, r.bounds.bottom
            )
        })
        .collect()
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a, 64-bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |hash, &b| {
        (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Canonical text the structure digest is computed over: one record per node
/// in document order (`depth|class|bounds|label`), then one per hierarchy
/// label region. Fields are separated by `\x1f`, records by `\x1e`.
pub fn canonical_structure(snapshot: &UiSnapshot) -> String {
    fn walk(out: &mut String, node: &UiNode, depth: usize) {
        let _ = write!(
            out,
            "N\x1f{depth}\x1f{}\x1f{}\x1f{}\x1e",
            node.class_name, node.bounds, node.label
        );
        for child in &node.children {
            walk(out, child, depth + 1);
        }
    }
    let mut out = String::new();
    if let Some(root) = &snapshot.hierarchy {
        walk(&mut out, root, 0);
    }
    for region in snapshot
        .text_regions
        .iter()
        .filter(|r| r.source == RegionSource::HierarchyLabel)
    {
        let _ = write!(out, "R\x1f{}\x1f{}\x1e", region.bounds, region.text);
    }
    out
}

pub fn signature(snapshot: &UiSnapshot) -> ScreenSignature {
    ScreenSignature {
        activity: snapshot.activity.clone(),
        window: snapshot.window.clone(),
        structure_digest: fnv1a64(canonical_structure(snapshot).as_bytes()),
    }
}

/// Area of the union of `boxes` clipped to `within`, by coordinate compression.
pub fn covered_area(within: &Bounds, boxes: &[Bounds]) -> u64 {
    let clipped: Vec<Bounds> = boxes.iter().filter_map(|b| b.intersection(within)).collect();
    if clipped.is_empty() {
        return 0;
    }
    let mut xs: Vec<u32> = clipped.iter().flat_map(|b| [b.left, b.right]).collect();
    let mut ys: Vec<u32> = clipped.iter().flat_map(|b| [b.top, b.bottom]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut area = 0u64;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let covered = clipped
                .iter()
                .any(|b| b.left <= xw[0] && b.right >= xw[1] && b.top <= yw[0] && b.bottom >= yw[1]);
            if covered {
                area += u64::from(xw[1] - xw[0]) * u64::from(yw[1] - yw[0]);
            }
        }
    }
    area
}

/// Textual iff the node has a label or text regions cover at least half its area.
pub fn node_textuality(node: &UiNode, regions: &[TextRegion]) -> Textuality {
    if !node.label.is_empty() {
        return Textuality::Textual;
    }
    let area = node.bounds.area();
    if area == 0 {
        return Textuality::NonTextual;
    }
    let boxes: Vec<Bounds> = regions.iter().map(|r| r.bounds).collect();
    if 2 * covered_area(&node.bounds, &boxes) >= area {
        Textuality::Textual
    } else {
        Textuality::NonTextual
    }
}
