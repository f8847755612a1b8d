//! Seeded generator of Yelp-shaped review records.
//!
//! Useful when no real review dump is at hand: records carry business
//! metadata, rating-dependent wording, a dominant stock opening for
//! positive reviews, occasional non-ASCII characters, a few non-restaurant
//! businesses and a few over-long reviews, so every preprocessing filter
//! has something to do.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::RawRecord;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub records: usize,
    pub businesses: usize,
    pub seed: u64,
    pub non_restaurant_fraction: f64,
    pub long_review_fraction: f64,
    pub non_ascii_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            records: 60_000,
            businesses: 600,
            seed: 2017,
            non_restaurant_fraction: 0.04,
            long_review_fraction: 0.02,
            non_ascii_fraction: 0.03,
        }
    }
}

const CITIES: &[(&str, &str)] = &[
    ("Las Vegas", "NV"),
    ("Henderson", "NV"),
    ("Phoenix", "AZ"),
    ("Scottsdale", "AZ"),
    ("Tempe", "AZ"),
    ("Mesa", "AZ"),
    ("Chandler", "AZ"),
    ("Charlotte", "NC"),
    ("Pittsburgh", "PA"),
    ("Cleveland", "OH"),
    ("Madison", "WI"),
    ("Champaign", "IL"),
    ("Toronto", "ON"),
    ("Montreal", "QC"),
    ("Calgary", "AB"),
];

struct Cuisine {
    tag: &'static str,
    kinds: &'static [&'static str],
    dishes: &'static [&'static str],
    extra: &'static [&'static str],
}

const CUISINES: &[Cuisine] = &[
    Cuisine {
        tag: "Mexican",
        kinds: &["Taqueria", "Cantina", "Mexican Grill", "Tacos"],
        dishes: &["carne asada tacos", "fish tacos", "enchiladas", "burrito", "chips and salsa", "guacamole", "carnitas", "churros", "street corn"],
        extra: &["Bars", "Tex-Mex"],
    },
    Cuisine {
        tag: "Italian",
        kinds: &["Trattoria", "Pizzeria", "Ristorante", "Pasta House"],
        dishes: &["margherita pizza", "lasagna", "spaghetti carbonara", "gnocchi", "tiramisu", "calamari", "chicken parm", "garlic bread", "risotto"],
        extra: &["Pizza", "Wine Bars"],
    },
    Cuisine {
        tag: "Japanese",
        kinds: &["Sushi Bar", "Ramen House", "Izakaya", "Sushi"],
        dishes: &["spicy tuna roll", "salmon sashimi", "tonkotsu ramen", "gyoza", "miso soup", "chicken katsu", "edamame", "dragon roll", "udon"],
        extra: &["Sushi Bars", "Ramen"],
    },
    Cuisine {
        tag: "Chinese",
        kinds: &["Chinese Kitchen", "Dim Sum House", "Noodle House", "Wok"],
        dishes: &["orange chicken", "dumplings", "fried rice", "kung pao chicken", "hot and sour soup", "chow mein", "mapo tofu", "egg rolls", "beef and broccoli"],
        extra: &["Dim Sum", "Szechuan"],
    },
    Cuisine {
        tag: "American (Traditional)",
        kinds: &["Diner", "Grill", "Kitchen", "Tavern"],
        dishes: &["burger", "fries", "meatloaf", "mac and cheese", "chicken wings", "onion rings", "club sandwich", "milkshake", "pot roast"],
        extra: &["Burgers", "Sandwiches"],
    },
    Cuisine {
        tag: "Gastropubs",
        kinds: &["Public House", "Pub", "Alehouse", "Taproom"],
        dishes: &["fish and chips", "pork belly", "truffle fries", "burger", "scotch egg", "beer cheese dip", "wings", "bread pudding", "flatbread"],
        extra: &["Bars", "Nightlife"],
    },
    Cuisine {
        tag: "Thai",
        kinds: &["Thai Kitchen", "Thai Cuisine", "Thai Bistro", "Thai House"],
        dishes: &["pad thai", "green curry", "tom yum soup", "drunken noodles", "mango sticky rice", "spring rolls", "pad see ew", "panang curry", "thai iced tea"],
        extra: &["Noodles", "Vegetarian"],
    },
    Cuisine {
        tag: "Indian",
        kinds: &["Curry House", "Tandoor", "Indian Kitchen", "Masala"],
        dishes: &["butter chicken", "garlic naan", "chicken tikka masala", "samosas", "lamb vindaloo", "biryani", "palak paneer", "mango lassi", "dal"],
        extra: &["Buffets", "Vegetarian"],
    },
    Cuisine {
        tag: "Breakfast & Brunch",
        kinds: &["Cafe", "Pancake House", "Brunch Spot", "Griddle"],
        dishes: &["pancakes", "eggs benedict", "french toast", "breakfast burrito", "hash browns", "chicken and waffles", "omelette", "biscuits and gravy", "avocado toast"],
        extra: &["Coffee & Tea", "Cafes"],
    },
    Cuisine {
        tag: "Vietnamese",
        kinds: &["Pho", "Vietnamese Kitchen", "Banh Mi Shop", "Noodle Bar"],
        dishes: &["pho", "banh mi", "spring rolls", "vermicelli bowl", "broken rice", "iced coffee", "lemongrass chicken", "egg rolls", "bun bo hue"],
        extra: &["Noodles", "Sandwiches"],
    },
    Cuisine {
        tag: "Steakhouses",
        kinds: &["Steakhouse", "Chophouse", "Prime", "Grill"],
        dishes: &["ribeye", "filet mignon", "creamed spinach", "lobster tail", "wedge salad", "mashed potatoes", "bone marrow", "crab cakes", "cheesecake"],
        extra: &["Seafood", "Wine Bars"],
    },
    Cuisine {
        tag: "Barbeque",
        kinds: &["BBQ", "Smokehouse", "Pit", "Barbecue"],
        dishes: &["brisket", "pulled pork", "ribs", "cornbread", "coleslaw", "burnt ends", "baked beans", "smoked sausage", "banana pudding"],
        extra: &["Southern", "Caterers"],
    },
    Cuisine {
        tag: "Mediterranean",
        kinds: &["Grill", "Kitchen", "Cafe", "Mezze"],
        dishes: &["gyro", "falafel", "hummus", "chicken shawarma", "baklava", "greek salad", "lamb kebab", "pita", "tabbouleh"],
        extra: &["Greek", "Middle Eastern"],
    },
    Cuisine {
        tag: "Korean",
        kinds: &["Korean BBQ", "Tofu House", "Korean Kitchen", "Bibimbap"],
        dishes: &["bulgogi", "bibimbap", "kimchi fried rice", "korean fried chicken", "japchae", "galbi", "soondubu", "kimchi", "tteokbokki"],
        extra: &["Barbeque", "Tofu"],
    },
];

const NON_RESTAURANT: &[(&str, &str, &[&str])] = &[
    ("Nail Spa", "Beauty & Spas", &["manicure", "pedicure", "gel nails"]),
    ("Auto Repair", "Automotive", &["oil change", "brake job", "tire rotation"]),
    ("Dental", "Health & Medical", &["cleaning", "filling", "checkup"]),
];

const SURNAMES: &[&str] = &[
    "Tony", "Maria", "Rosa", "Kim", "Nguyen", "Patel", "Murphy", "Lucky", "Golden", "Papa", "Sam", "Jimmy", "Lee", "Garcia", "Rossi",
];
const ADJECTIVES: &[&str] = &[
    "Golden", "Rusty", "Happy", "Little", "Blue", "Red", "Hungry", "Lucky", "Old Town", "Desert", "Urban", "Silver",
];
const PEOPLE: &[&str] = &["Maria", "Josh", "Tony", "Ashley", "Kevin", "Jen", "Mike", "Sarah", "Chris", "Amy"];
const POSITIVE: &[&str] = &[
    "delicious", "amazing", "fantastic", "tasty", "fresh", "excellent", "perfect", "incredible", "solid", "flavorful", "awesome", "so good",
];
const NEGATIVE: &[&str] = &[
    "bland", "cold", "greasy", "overcooked", "soggy", "way too salty", "dry", "stale", "underwhelming", "lukewarm",
];
const STAFF: &[&str] = &["server", "waitress", "waiter", "bartender", "host", "manager", "cashier"];
const COMPANIONS: &[&str] = &["my wife", "my husband", "my friends", "the kids", "my coworkers", "my mom", "my boyfriend", "my sister"];
const MEALS: &[&str] = &["lunch", "dinner", "brunch", "a quick bite", "happy hour", "takeout", "a late night snack", "date night"];
const WAITS: &[&str] = &["twenty minutes", "an hour", "forty minutes", "45 minutes", "over half an hour"];

const POS_OPENERS: &[(&str, u32)] = &[
    ("Great food!", 30),
    ("Great food and great service.", 12),
    ("Love this place!", 10),
    ("This place is a hidden gem.", 6),
    ("Best {dish} in {city}.", 8),
    ("We came here for {meal} and loved it.", 8),
    ("Finally tried {name} and it did not disappoint.", 5),
    ("Wow.", 4),
    ("Such a cute little spot.", 5),
    ("Been coming here for years.", 6),
    ("Stopped in with {who} for {meal}.", 8),
];
const POS_BODY: &[&str] = &[
    "The {dish} was {pos}.",
    "Our {staff} {person} was super friendly and attentive.",
    "I had the {dish} and {who} had the {dish2}.",
    "Portions are huge and prices are fair.",
    "The {dish} is {pos} and the {dish2} is even better.",
    "Service was quick even though it was packed.",
    "Try the {dish}, you won't regret it.",
    "Everything we ordered tasted {pos}.",
    "The atmosphere is cozy and relaxed.",
    "The {dish} came out hot and {pos}.",
    "Parking can be tough on weekends but it is worth it.",
    "They were busy but the staff kept everything moving.",
    "{who_cap} could not stop talking about the {dish}.",
    "Make sure you save room for the {dish2}.",
];
const POS_CLOSERS: &[(&str, u32)] = &[
    ("", 20),
    ("Will definitely be back!", 15),
    ("Highly recommend.", 12),
    ("5 stars!", 6),
    ("Can't wait to come back.", 8),
    ("This is our new favorite spot in {city}.", 5),
];
const MID_OPENERS: &[(&str, u32)] = &[
    ("It was okay.", 10),
    ("Decent but nothing special.", 10),
    ("Mixed feelings about this one.", 6),
    ("Came here for {meal} with {who}.", 8),
    ("Good food, slow service.", 6),
];
const MID_BODY: &[&str] = &[
    "The {dish} was good but the {dish2} was {neg}.",
    "Service was a little slow.",
    "Prices are a bit high for what you get.",
    "Our {staff} seemed overwhelmed.",
    "The {dish} was {pos} but the portion was small.",
    "It took {wait} to get a table.",
    "Nothing was bad, nothing was memorable either.",
    "The place was loud and a little cramped.",
];
const MID_CLOSERS: &[(&str, u32)] = &[
    ("", 20),
    ("Might give it another try.", 10),
    ("Probably won't rush back.", 8),
    ("Three stars.", 5),
];
const NEG_OPENERS: &[(&str, u32)] = &[
    ("Very disappointed.", 10),
    ("Not impressed.", 8),
    ("Worst service ever.", 6),
    ("I really wanted to like this place.", 8),
    ("Avoid.", 4),
    ("We waited {wait} for a table.", 6),
    ("Came here for {meal} and regretted it.", 6),
];
const NEG_BODY: &[&str] = &[
    "The {dish} was {neg} and overpriced.",
    "Our {staff} never came back to check on us.",
    "We waited {wait} for our food.",
    "The tables were dirty and the music was way too loud.",
    "{who_cap} said the {dish} was {neg}.",
    "The manager did not seem to care at all.",
    "They got our order wrong twice.",
    "The {dish2} tasted like it came from a freezer.",
    "Nobody greeted us when we walked in.",
];
const NEG_CLOSERS: &[(&str, u32)] = &[
    ("", 15),
    ("Never again.", 10),
    ("Save your money.", 8),
    ("One star is generous.", 5),
    ("Go somewhere else.", 6),
];

struct Business {
    name: String,
    city: &'static str,
    state: &'static str,
    tags: Vec<String>,
    dishes: &'static [&'static str],
    restaurant: bool,
}

fn pick<'a, R: Rng>(items: &[&'a str], rng: &mut R) -> &'a str {
    items.choose(rng).copied().expect("non-empty list")
}

fn pick_weighted<'a, R: Rng>(items: &[(&'a str, u32)], rng: &mut R) -> &'a str {
    let dist = WeightedIndex::new(items.iter().map(|i| i.1)).expect("positive weights");
    items[dist.sample(rng)].0
}

fn make_business<R: Rng>(rng: &mut R, non_restaurant: bool) -> Business {
    let (city, state) = *CITIES.choose(rng).unwrap();
    if non_restaurant {
        let (kind, tag, services) = NON_RESTAURANT.choose(rng).unwrap();
        return Business {
            name: format!("{} {}", pick(ADJECTIVES, rng), kind),
            city,
            state,
            tags: vec![tag.to_string()],
            dishes: services,
            restaurant: false,
        };
    }
    let c = CUISINES.choose(rng).unwrap();
    let kind = pick(c.kinds, rng);
    let name = match rng.gen_range(0..4) {
        0 => format!("{}'s {}", pick(SURNAMES, rng), kind),
        1 => format!("The {} {}", pick(ADJECTIVES, rng), kind),
        2 => format!("{} {}", city, kind),
        _ => {
            let a = pick(SURNAMES, rng).as_bytes()[0] as char;
            let b = pick(SURNAMES, rng).as_bytes()[0] as char;
            format!("{a}.{b}. {}'s", pick(SURNAMES, rng))
        }
    };
    let mut tags = vec![c.tag.to_string()];
    if rng.gen_bool(0.5) {
        tags.push(pick(c.extra, rng).to_string());
    }
    tags.push("Restaurants".into());
    Business {
        name,
        city,
        state,
        tags,
        dishes: c.dishes,
        restaurant: true,
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn fill<R: Rng>(template: &str, biz: &Business, rng: &mut R) -> String {
    let dish = pick(biz.dishes, rng);
    let mut dish2 = pick(biz.dishes, rng);
    while dish2 == dish && biz.dishes.len() > 1 {
        dish2 = pick(biz.dishes, rng);
    }
    let who = pick(COMPANIONS, rng);
    let mut s = template.to_owned();
    for (slot, value) in [
        ("{dish}", dish.to_owned()),
        ("{dish2}", dish2.to_owned()),
        ("{pos}", pick(POSITIVE, rng).to_owned()),
        ("{neg}", pick(NEGATIVE, rng).to_owned()),
        ("{staff}", pick(STAFF, rng).to_owned()),
        ("{person}", pick(PEOPLE, rng).to_owned()),
        ("{who_cap}", capitalize(who)),
        ("{who}", who.to_owned()),
        ("{meal}", pick(MEALS, rng).to_owned()),
        ("{wait}", pick(WAITS, rng).to_owned()),
        ("{city}", biz.city.to_owned()),
        ("{name}", biz.name.clone()),
    ] {
        s = s.replace(slot, &value);
    }
    s
}

fn review_text<R: Rng>(biz: &Business, rating: u8, cfg: &SynthConfig, rng: &mut R) -> String {
    let (openers, body, closers) = match rating {
        4 | 5 => (POS_OPENERS, POS_BODY, POS_CLOSERS),
        3 => (MID_OPENERS, MID_BODY, MID_CLOSERS),
        _ => (NEG_OPENERS, NEG_BODY, NEG_CLOSERS),
    };
    let mut parts = vec![fill(pick_weighted(openers, rng), biz, rng)];
    let n_body = if rng.gen_bool(cfg.long_review_fraction) {
        rng.gen_range(7..10)
    } else {
        rng.gen_range(1..4)
    };
    let mut used = Vec::new();
    for _ in 0..n_body {
        let mut t = pick(body, rng);
        for _ in 0..3 {
            if !used.contains(&t) {
                break;
            }
            t = pick(body, rng);
        }
        used.push(t);
        parts.push(fill(t, biz, rng));
    }
    let closer = fill(pick_weighted(closers, rng), biz, rng);
    if !closer.is_empty() {
        parts.push(closer);
    }
    let mut text = parts.join(" ");
    if rng.gen_bool(0.1) {
        text = text.replace('!', "!!");
    }
    if rng.gen_bool(0.05) {
        text = text.to_lowercase();
    }
    if rng.gen_bool(cfg.non_ascii_fraction) {
        text.push_str(match rng.gen_range(0..3) {
            0 => " Caf\u{e9} vibes.",
            1 => " \u{2014} worth it.",
            _ => " Ol\u{e9}!",
        });
    }
    text
}

/// Generates `cfg.records` records deterministically from `cfg.seed`.
pub fn synthetic_records(cfg: &SynthConfig) -> Vec<RawRecord> {
    let mut rng: ChaCha8Rng = stream_rng(cfg.seed, 0);
    let businesses: Vec<Business> = (0..cfg.businesses.max(1))
        .map(|_| {
            let nr = rng.gen_bool(cfg.non_restaurant_fraction);
            make_business(&mut rng, nr)
        })
        .collect();
    let ratings = WeightedIndex::new([14u32, 9, 14, 26, 37]).unwrap();
    (0..cfg.records)
        .map(|_| {
            let biz = businesses.choose(&mut rng).unwrap();
            let rating = ratings.sample(&mut rng) as u8 + 1;
            let mut text = review_text(biz, rating, cfg, &mut rng);
            if !biz.restaurant {
                text = text.replace("food", "work");
            }
            RawRecord {
                review_text: text,
                rating,
                business_name: biz.name.clone(),
                city: biz.city.into(),
                state: biz.state.into(),
                tags: biz.tags.clone(),
            }
        })
        .collect()
}

/// Writes records as JSON lines in the Yelp dump layout (`text`, `stars`,
/// `name`, `city`, `state`, comma-joined `categories`).
pub fn write_synthetic_jsonl(path: &Path, records: &[RawRecord]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        let line = json!({
            "text": r.review_text,
            "stars": r.rating,
            "name": r.business_name,
            "city": r.city,
            "state": r.state,
            "categories": r.tags.join(", "),
        });
        serde_json::to_writer(&mut buf, &line)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
