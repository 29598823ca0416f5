use std::fmt::Write as _;

use hfvp_core::{DetectionResult, GroundTruth, ImageLine, SegmentSet};

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"];
const ZENITH: &str = "#17becf";
const UNASSIGNED: &str = "#aaaaaa";

fn line_across(out: &mut String, l: &ImageLine, width: f64, style: &str) {
    if l.is_vertical() {
        return;
    }
    let _ = writeln!(
        out,
        r#"<line x1="0" y1="{:.2}" x2="{width}" y2="{:.2}" {style}/>"#,
        l.v_at(0.0),
        l.v_at(width)
    );
}

/// Segments colored by VP, zenith inliers in cyan, detected horizon in red
/// and the ground truth dashed.
pub fn overlay(set: &SegmentSet, r: &DetectionResult, gt: Option<&GroundTruth>) -> String {
    let (w, h) = (set.frame.width, set.frame.height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for (i, s) in set.segments.iter().enumerate() {
        let color = if r.zenith.inlier_ids.contains(&i) {
            ZENITH
        } else {
            match r.assignments.get(i).copied().flatten() {
                Some(k) => PALETTE[k % PALETTE.len()],
                None => UNASSIGNED,
            }
        };
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            s.p1.0, s.p1.1, s.p2.0, s.p2.1
        );
    }
    if let Some(g) = gt {
        line_across(
            &mut out,
            &g.horizon_line(),
            w,
            r##"stroke="#2ca02c" stroke-width="2" stroke-dasharray="8 6""##,
        );
    }
    line_across(&mut out, &r.horizon_image, w, r##"stroke="#d62728" stroke-width="3""##);
    out.push_str("</svg>\n");
    out
}
