//! Minimal deterministic line-chart renderer.
//!
//! Charts are drawn directly into an RGB buffer with the bitmap font from
//! [`super::font`]: fixed canvas size, no timestamps, no system fonts, so
//! the same data always produces byte-identical PNG files.

use super::font;
use image::{Rgb, RgbImage};

pub const WIDTH: u32 = 800;
pub const HEIGHT: u32 = 600;
const MARGIN_LEFT: i64 = 70;
const MARGIN_RIGHT: i64 = 20;
const MARGIN_TOP: i64 = 40;
const MARGIN_BOTTOM: i64 = 50;

const BG: [u8; 3] = [255, 255, 255];
const AXIS: [u8; 3] = [40, 40, 40];
const GRID: [u8; 3] = [220, 220, 220];

pub const SERIES_COLORS: [[u8; 3]; 4] = [
    [31, 119, 180],  // blue
    [255, 127, 14],  // orange
    [44, 160, 44],   // green
    [214, 39, 40],   // red
];

pub struct Series {
    pub label: String,
    pub color: [u8; 3],
    /// (x, y) points in data coordinates.
    pub points: Vec<(f64, f64)>,
}

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl LineChart {
    pub fn render(&self) -> RgbImage {
        let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, Rgb(BG));

        let (x_min, x_max, y_min, y_max) = self.data_bounds();
        let plot_w = WIDTH as i64 - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT as i64 - MARGIN_TOP - MARGIN_BOTTOM;

        let to_px = |x: f64, y: f64| -> (i64, i64) {
            let fx = if x_max > x_min { (x - x_min) / (x_max - x_min) } else { 0.5 };
            let fy = if y_max > y_min { (y - y_min) / (y_max - y_min) } else { 0.5 };
            (
                MARGIN_LEFT + (fx * plot_w as f64).round() as i64,
                MARGIN_TOP + plot_h - (fy * plot_h as f64).round() as i64,
            )
        };

        // gridlines and tick labels, 5 divisions each way
        for i in 0..=4 {
            let fx = i as f64 / 4.0;
            let gx = MARGIN_LEFT + (fx * plot_w as f64).round() as i64;
            draw_line(&mut img, gx, MARGIN_TOP, gx, MARGIN_TOP + plot_h, GRID);
            let value = x_min + fx * (x_max - x_min);
            let text = format_tick(value);
            let tw = font::text_width(&text, 1) as i64;
            font::draw_text(&mut img, gx - tw / 2, MARGIN_TOP + plot_h + 8, &text, 1, AXIS);

            let fy = i as f64 / 4.0;
            let gy = MARGIN_TOP + plot_h - (fy * plot_h as f64).round() as i64;
            draw_line(&mut img, MARGIN_LEFT, gy, MARGIN_LEFT + plot_w, gy, GRID);
            let value = y_min + fy * (y_max - y_min);
            let text = format_tick(value);
            let tw = font::text_width(&text, 1) as i64;
            font::draw_text(&mut img, MARGIN_LEFT - tw - 6, gy - 3, &text, 1, AXIS);
        }

        // axes
        draw_line(&mut img, MARGIN_LEFT, MARGIN_TOP, MARGIN_LEFT, MARGIN_TOP + plot_h, AXIS);
        draw_line(
            &mut img,
            MARGIN_LEFT,
            MARGIN_TOP + plot_h,
            MARGIN_LEFT + plot_w,
            MARGIN_TOP + plot_h,
            AXIS,
        );

        for s in &self.series {
            let mut prev: Option<(i64, i64)> = None;
            for &(x, y) in &s.points {
                let p = to_px(x, y);
                if let Some(q) = prev {
                    draw_line(&mut img, q.0, q.1, p.0, p.1, s.color);
                }
                draw_marker(&mut img, p.0, p.1, s.color);
                prev = Some(p);
            }
        }

        // title, axis labels, legend
        let tw = font::text_width(&self.title, 2) as i64;
        font::draw_text(&mut img, (WIDTH as i64 - tw) / 2, 10, &self.title, 2, AXIS);
        let tw = font::text_width(&self.x_label, 1) as i64;
        font::draw_text(
            &mut img,
            MARGIN_LEFT + (plot_w - tw) / 2,
            HEIGHT as i64 - 18,
            &self.x_label,
            1,
            AXIS,
        );
        font::draw_text(&mut img, 6, MARGIN_TOP - 14, &self.y_label, 1, AXIS);

        let mut ly = MARGIN_TOP + 6;
        for s in &self.series {
            let lx = MARGIN_LEFT + plot_w - 120;
            draw_line(&mut img, lx, ly + 3, lx + 18, ly + 3, s.color);
            font::draw_text(&mut img, lx + 24, ly, &s.label, 1, AXIS);
            ly += 14;
        }

        img
    }

    fn data_bounds(&self) -> (f64, f64, f64, f64) {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for s in &self.series {
            for &(x, y) in &s.points {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        if !x_min.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        // pad the y range a little so curves do not sit on the frame
        let pad = if y_max > y_min { (y_max - y_min) * 0.05 } else { 0.5 };
        (x_min, x_max.max(x_min + 1e-12), y_min - pad, y_max + pad)
    }
}

fn format_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

fn draw_marker(img: &mut RgbImage, x: i64, y: i64, color: [u8; 3]) {
    for dy in -1..=1i64 {
        for dx in -1..=1i64 {
            put(img, x + dx, y + dy, color);
        }
    }
}

fn put(img: &mut RgbImage, x: i64, y: i64, color: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, Rgb(color));
    }
}

/// Bresenham line, clipped to the canvas.
fn draw_line(img: &mut RgbImage, x0: i64, y0: i64, x1: i64, y1: i64, color: [u8; 3]) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    loop {
        put(img, x, y, color);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}
