//! Jittered screen templates, one family per motif, for building synthetic
//! labeled datasets.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::motifs::{LabeledScreen, MotifLabel};
use crate::snapshot::{Bounds, RegionSource, TextRegion, UiNode, UiSnapshot};

pub const SCREEN: (u32, u32) = (1080, 1920);

const TEXT: &str = "android.widget.TextView";
const IMAGE: &str = "android.widget.ImageView";
const BUTTON: &str = "android.widget.Button";
const ICON: &str = "android.widget.ImageButton";
const EDIT: &str = "android.widget.EditText";

struct Canvas<'r> {
    rng: &'r mut ChaCha8Rng,
    nodes: Vec<UiNode>,
    regions: Vec<TextRegion>,
}

fn clamp_bounds(l: i64, t: i64, r: i64, b: i64) -> Bounds {
    let cx = |v: i64| v.clamp(0, i64::from(SCREEN.0)) as u32;
    let cy = |v: i64| v.clamp(0, i64::from(SCREEN.1)) as u32;
    let (l, r) = (cx(l), cx(r));
    let (t, b) = (cy(t), cy(b));
    Bounds {
        left: l.min(r),
        top: t.min(b),
        right: l.max(r),
        bottom: t.max(b),
    }
}

impl Canvas<'_> {
    fn jitter(&mut self, amount: i64) -> i64 {
        if amount == 0 {
            0
        } else {
            self.rng.random_range(-amount..=amount)
        }
    }

    fn pick<'a>(&mut self, options: &[&'a str]) -> &'a str {
        options.choose(self.rng).copied().unwrap_or("")
    }

    /// Adds a leaf with a few pixels of positional jitter.
    fn add(&mut self, class: &str, label: &str, l: i64, t: i64, r: i64, b: i64) -> &mut UiNode {
        let (dx, dy) = (self.jitter(16), self.jitter(16));
        let node = UiNode {
            class_name: class.to_string(),
            label: label.to_string(),
            bounds: clamp_bounds(l + dx, t + dy, r + dx, b + dy),
            editable: class == EDIT,
            clickable: class == BUTTON || class == ICON,
            ..UiNode::default()
        };
        self.nodes.push(node);
        self.nodes.last_mut().expect("just pushed")
    }

    fn region(&mut self, text: &str, l: i64, t: i64, r: i64, b: i64) {
        if let Some(region) = TextRegion::new(text, clamp_bounds(l, t, r, b), RegionSource::ExternalRecognizer) {
            self.regions.push(region);
        }
    }

    fn finish(self, label: MotifLabel) -> UiSnapshot {
        let mut root = UiNode {
            class_name: "android.widget.FrameLayout".into(),
            bounds: Bounds {
                left: 0,
                top: 0,
                right: SCREEN.0,
                bottom: SCREEN.1,
            },
            children: self.nodes,
            ..UiNode::default()
        };
        root.renumber();
        UiSnapshot {
            hierarchy: Some(root),
            text_regions: self.regions,
            activity: format!("com.example.synth.{}Activity", label.name().replace(' ', "")),
            window: "main".into(),
            captured_at: 0,
            screen_size: SCREEN,
        }
    }
}

/// One jittered instance of `label`'s template.
pub fn synth_screen(label: MotifLabel, rng: &mut ChaCha8Rng) -> UiSnapshot {
    let mut c = Canvas {
        rng,
        nodes: Vec::new(),
        regions: Vec::new(),
    };
    match label {
        MotifLabel::Advertisement => {
            c.add(IMAGE, "", 0, 0, 1080, 1920).clickable = true;
            let size = c.rng.random_range(24..=96);
            let close = c.pick(&["X", "Close", "Skip ad", "Dismiss"]);
            c.add(ICON, close, 1040 - size, 40, 1040, 40 + size);
            let tag = c.pick(&["Sponsored", "Ad", "Advertisement"]);
            c.region(tag, 40, 1780, 400, 1860);
        }
        MotifLabel::CalendarTimeWeather => {
            let temp = format!("{}°", c.rng.random_range(-5..35));
            c.add(TEXT, &temp, 340, 200, 740, 420);
            let day = c.pick(&["Monday", "Tuesday", "Friday", "Sunday"]);
            c.add(TEXT, day, 340, 440, 740, 520);
            for (i, d) in ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"].iter().enumerate() {
                let x = 40 + i as i64 * 143;
                c.add(TEXT, d, x, 900, x + 120, 960);
                c.add(IMAGE, "", x, 980, x + 120, 1100);
                let t = format!("{}°", c.rng.random_range(0..30));
                c.add(TEXT, &t, x, 1120, x + 120, 1180);
            }
        }
        MotifLabel::Catalog => {
            let rows = c.rng.random_range(2..=3);
            for r in 0..rows {
                for col in 0..2 {
                    let (x, y) = (40 + col * 520, 200 + r * 560);
                    c.add(IMAGE, "", x, y, x + 480, y + 400).clickable = true;
                    let name = format!("Item {}", r * 2 + col + 1);
                    c.add(TEXT, &name, x, y + 410, x + 480, y + 460);
                    let price = format!("${}.99", c.rng.random_range(5..90));
                    c.add(TEXT, &price, x, y + 470, x + 200, y + 520);
                }
            }
            c.add(TEXT, "Shop all categories", 40, 60, 700, 140);
        }
        MotifLabel::Feed => {
            let posts = c.rng.random_range(2..=3);
            for p in 0..posts {
                let y = 120 + p * 600;
                c.add(IMAGE, "", 40, y, 140, y + 100);
                let who = c.pick(&["alex posted", "sam shared a photo", "jo posted"]);
                c.add(TEXT, who, 160, y + 20, 800, y + 80);
                c.add(IMAGE, "", 40, y + 120, 1040, y + 480);
                c.add(BUTTON, "Like", 40, y + 500, 300, y + 570);
                c.add(BUTTON, "Comment", 320, y + 500, 620, y + 570);
            }
        }
        MotifLabel::Form => {
            let pool = ["First name", "Surname", "Email", "Phone", "Address", "City", "Zip code"];
            let n = c.rng.random_range(3..=5);
            let start = c.rng.random_range(0..=pool.len() - n);
            for (i, field) in pool[start..start + n].iter().enumerate() {
                let y = 200 + i as i64 * 220;
                c.add(TEXT, field, 60, y, 600, y + 60);
                c.add(EDIT, "", 60, y + 70, 1020, y + 180);
            }
            c.add("android.widget.Spinner", "Country", 60, 1400, 1020, 1500).clickable = true;
            let submit = c.pick(&["Submit", "Save", "Done"]);
            c.add(BUTTON, submit, 60, 1650, 1020, 1780);
        }
        MotifLabel::HomeMenu => {
            let labels = ["Home", "Profile", "Messages", "Photos", "Music", "Settings", "Shop", "News", "Help"];
            let count = c.rng.random_range(6..=9);
            for (i, l) in labels.iter().take(count).enumerate() {
                let (col, row) = (i as i64 % 3, i as i64 / 3);
                let (x, y) = (60 + col * 340, 400 + row * 380);
                c.add(ICON, "", x, y, x + 280, y + 260);
                c.add(TEXT, l, x, y + 270, x + 280, y + 330);
            }
        }
        MotifLabel::List => {
            let rows = c.rng.random_range(8..=11);
            for r in 0..rows {
                let y = 100 + r * 160;
                let text = format!("List item {}", r + 1);
                c.add(TEXT, &text, 40, y, 1040, y + 120).clickable = true;
            }
        }
        MotifLabel::LogIn => {
            c.add(IMAGE, "", 390, 200, 690, 500);
            let user = c.pick(&["Username", "Email"]);
            c.add(EDIT, user, 100, 700, 980, 820);
            c.add(EDIT, "Password", 100, 860, 980, 980);
            let go = c.pick(&["Sign in", "Log in", "Login"]);
            c.add(BUTTON, go, 100, 1060, 980, 1180);
            c.add(TEXT, "Forgot password?", 300, 1220, 780, 1280);
        }
        MotifLabel::Map => {
            c.add("com.google.android.gms.maps.MapView", "", 0, 0, 1080, 1920);
            let pins = c.rng.random_range(2..=5);
            for _ in 0..pins {
                let (x, y) = (c.rng.random_range(100..900), c.rng.random_range(300..1500));
                c.add(IMAGE, "", x, y, x + 60, y + 90);
            }
            c.add(BUTTON, "Directions", 700, 1740, 1040, 1860);
        }
        MotifLabel::Onboarding => {
            c.add(IMAGE, "", 140, 300, 940, 1100);
            let title = c.pick(&["Welcome", "Discover new places", "Stay in touch"]);
            c.add(TEXT, title, 100, 1180, 980, 1280);
            for i in 0..4 {
                let x = 440 + i * 60;
                c.add("android.view.View", "", x, 1500, x + 30, 1530);
            }
            c.add(BUTTON, "Skip", 40, 1720, 300, 1840);
            let next = c.pick(&["Next", "Continue", "Get started"]);
            c.add(BUTTON, next, 700, 1720, 1040, 1840);
        }
        MotifLabel::Player => {
            c.add("android.widget.VideoView", "", 0, 0, 1080, 700).clickable = true;
            c.add("android.widget.SeekBar", "", 40, 740, 1040, 800);
            c.add(ICON, "Play", 480, 840, 600, 960);
            c.add(ICON, "Share", 860, 840, 960, 940);
            c.add(ICON, "Settings", 960, 840, 1060, 940);
            let title = c.pick(&["Episode 4", "Live stream", "Trailer"]);
            c.add(TEXT, title, 40, 1000, 1040, 1080);
        }
        MotifLabel::PopUp => {
            c.add("android.view.View", "", 0, 0, 1080, 1920);
            let msg = c.pick(&["Are you sure?", "Allow notifications?", "Rate this app"]);
            c.add(TEXT, msg, 140, 760, 940, 900);
            c.add(BUTTON, "OK", 560, 1020, 900, 1120);
            c.add(BUTTON, "Cancel", 180, 1020, 520, 1120);
        }
        MotifLabel::Product => {
            c.add(IMAGE, "", 0, 100, 1080, 900);
            let name = c.pick(&["Running shoes", "Coffee maker", "Desk lamp"]);
            c.add(TEXT, name, 40, 940, 1040, 1020);
            let price = format!("${}.99", c.rng.random_range(10..200));
            c.add(TEXT, &price, 40, 1040, 400, 1110);
            c.add("android.widget.RatingBar", "", 40, 1140, 600, 1200);
            c.add(BUTTON, "Add to cart", 40, 1700, 1040, 1840);
        }
        MotifLabel::Search => {
            c.add(EDIT, "Search", 40, 60, 860, 180);
            let go = c.pick(&["Go", "Search"]);
            c.add(ICON, go, 880, 60, 1040, 180);
            let n = c.rng.random_range(3..=6);
            for i in 0..n {
                let y = 260 + i * 130;
                c.add(TEXT, "Recent search", 40, y, 1040, y + 100).clickable = true;
            }
        }
        MotifLabel::Settings => {
            let opts = ["Notifications", "Dark mode", "Location", "Sync", "Privacy", "Sounds", "Data saver"];
            let n = c.rng.random_range(4..=7);
            for (i, o) in opts.iter().take(n).enumerate() {
                let y = 160 + i as i64 * 180;
                c.add(TEXT, o, 40, y, 800, y + 100);
                c.add("android.widget.Switch", "", 880, y, 1040, y + 100).clickable = true;
            }
        }
        MotifLabel::Splash => {
            let s = c.rng.random_range(200..400);
            c.add(IMAGE, "", 540 - s / 2, 860 - s / 2, 540 + s / 2, 860 + s / 2);
            let name = c.pick(&["Acme", "Bloom", "Orbit"]);
            c.add(TEXT, name, 340, 1100, 740, 1180);
        }
        MotifLabel::TermsAndConditions => {
            c.add("android.widget.ScrollView", "", 0, 100, 1080, 1500);
            let title = c.pick(&["Terms of service", "Terms and conditions", "Privacy policy"]);
            c.add(TEXT, title, 40, 120, 1040, 200);
            c.add(TEXT, "By using this service you agree to the following terms", 40, 220, 1040, 1400);
            c.add("android.widget.CheckBox", "I agree", 40, 1540, 600, 1620).clickable = true;
            c.add(BUTTON, "Accept", 560, 1700, 1040, 1820);
            c.add(BUTTON, "Decline", 40, 1700, 520, 1820);
        }
        MotifLabel::TravelBooking => {
            c.add(TEXT, "From", 60, 200, 300, 260);
            c.add(EDIT, "Departure city", 60, 270, 1020, 380);
            c.add(TEXT, "To", 60, 420, 300, 480);
            c.add(EDIT, "Destination", 60, 490, 1020, 600);
            c.add(TEXT, "Depart", 60, 660, 500, 720);
            c.add("android.widget.DatePicker", "", 60, 730, 1020, 1100);
            c.add(TEXT, "Passengers", 60, 1140, 500, 1200);
            c.add(BUTTON, "Book flight", 60, 1650, 1020, 1780);
        }
        MotifLabel::TypeMessage => {
            let n = c.rng.random_range(3..=6);
            for i in 0..n {
                let y = 120 + i * 200;
                let (l, r) = if i % 2 == 0 { (40, 700) } else { (380, 1040) };
                let msg = c.pick(&["hey there", "see you soon", "sounds good", "on my way"]);
                c.add(TEXT, msg, l, y, r, y + 150);
            }
            c.add(EDIT, "Type a message", 40, 1760, 900, 1880);
            c.add(ICON, "Send", 920, 1760, 1040, 1880);
        }
        MotifLabel::Viewer => {
            c.add(IMAGE, "", 0, 0, 1080, 1920);
            if c.rng.random_bool(0.5) {
                let counter = format!("{} / {}", c.rng.random_range(1..9), c.rng.random_range(9..30));
                c.region(&counter, 440, 60, 640, 120);
            }
        }
        MotifLabel::WebBrowser => {
            let url = c.pick(&["https://example.com", "https://news.example.org", "www.example.net"]);
            c.add(EDIT, url, 40, 40, 860, 150);
            c.add(ICON, "Tabs", 880, 40, 1040, 150);
            c.add("android.webkit.WebView", "", 0, 180, 1080, 1780);
            c.add(ICON, "Refresh", 40, 1800, 200, 1900);
        }
    }
    c.finish(label)
}

/// `per_class` jittered screens for each of the 21 motifs.
pub fn synth_dataset(per_class: usize, seed: u64) -> Vec<LabeledScreen> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class * MotifLabel::ALL.len());
    for label in MotifLabel::ALL {
        for i in 0..per_class {
            out.push(LabeledScreen {
                snapshot: synth_screen(label, &mut rng),
                label,
                source_id: format!("{}-{i:03}", label.name().to_lowercase().replace(' ', "-")),
            });
        }
    }
    out
}
