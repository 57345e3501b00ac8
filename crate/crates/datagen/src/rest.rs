//! The bundled restaurant database and question corpus.

use std::fmt::Write as _;

pub const COUNTIES: &[&str] = &[
    "Alameda",
    "Contra Costa",
    "Marin",
    "Napa",
    "San Francisco",
    "San Mateo",
    "Santa Clara",
    "Sonoma",
];

/// name, county
pub const CITIES: &[(&str, &str)] = &[
    ("San Francisco", "San Francisco"),
    ("Oakland", "Alameda"),
    ("Berkeley", "Alameda"),
    ("Alameda", "Alameda"),
    ("Fremont", "Alameda"),
    ("Hayward", "Alameda"),
    ("San Jose", "Santa Clara"),
    ("Santa Clara", "Santa Clara"),
    ("Sunnyvale", "Santa Clara"),
    ("Mountain View", "Santa Clara"),
    ("Cupertino", "Santa Clara"),
    ("Palo Alto", "Santa Clara"),
    ("Redwood City", "San Mateo"),
    ("San Mateo", "San Mateo"),
    ("Daly City", "San Mateo"),
    ("Menlo Park", "San Mateo"),
    ("Sausalito", "Marin"),
    ("San Rafael", "Marin"),
    ("Novato", "Marin"),
    ("Napa", "Napa"),
    ("Sonoma", "Sonoma"),
    ("Petaluma", "Sonoma"),
    ("Santa Rosa", "Sonoma"),
    ("Walnut Creek", "Contra Costa"),
    ("Richmond", "Contra Costa"),
    ("Martinez", "Contra Costa"),
];

pub const FOODS: &[&str] = &[
    "italian",
    "chinese",
    "french",
    "mexican",
    "thai",
    "japanese",
    "indian",
    "american",
    "seafood",
    "pizza",
    "vegan",
    "korean",
    "vietnamese",
    "greek",
    "bakery",
    "barbecue",
    "mediterranean",
];

/// name, food, city, rating
pub const RESTAURANTS: &[(&str, &str, &str, f64)] = &[
    ("golden dragon", "chinese", "San Francisco", 4.2),
    ("jade palace", "chinese", "Oakland", 3.8),
    ("lucky bamboo", "chinese", "San Jose", 3.5),
    ("great wall", "chinese", "Fremont", 4.0),
    ("bella roma", "italian", "San Francisco", 4.5),
    ("la piazza", "italian", "Berkeley", 4.1),
    ("trattoria mona", "italian", "Palo Alto", 4.4),
    ("casa verde", "mexican", "Hayward", 3.9),
    ("el camino grill", "mexican", "Sunnyvale", 3.6),
    ("rosa cantina", "mexican", "San Jose", 4.3),
    ("taqueria del sol", "mexican", "Oakland", 4.6),
    ("le petit bistro", "french", "San Francisco", 4.7),
    ("chez margot", "french", "Menlo Park", 4.2),
    ("maison bleue", "french", "Sausalito", 4.0),
    ("bangkok garden", "thai", "Berkeley", 4.1),
    ("siam orchid", "thai", "Mountain View", 3.7),
    ("thai lotus", "thai", "Daly City", 3.9),
    ("tokyo garden", "japanese", "San Jose", 4.4),
    ("sakura house", "japanese", "Cupertino", 4.5),
    ("ginza sushi", "japanese", "San Mateo", 4.2),
    ("wasabi grill", "japanese", "Santa Clara", 3.8),
    ("taj palace", "indian", "Fremont", 4.3),
    ("curry leaf", "indian", "Sunnyvale", 4.0),
    ("bombay spice", "indian", "Berkeley", 3.9),
    ("the blue plate", "american", "San Francisco", 4.1),
    ("harbor house", "american", "Sausalito", 3.8),
    ("valley diner", "american", "Walnut Creek", 3.4),
    ("the corner table", "american", "Palo Alto", 4.0),
    ("pier light", "seafood", "San Francisco", 4.6),
    ("crab shack", "seafood", "Richmond", 3.7),
    ("blue water grill", "seafood", "Oakland", 4.2),
    ("the wharf", "seafood", "Sausalito", 4.3),
    ("napoli express", "pizza", "San Jose", 3.6),
    ("stone oven", "pizza", "Berkeley", 4.4),
    ("slice of sky", "pizza", "Daly City", 3.5),
    ("green fork", "vegan", "Palo Alto", 4.2),
    ("sprout kitchen", "vegan", "San Francisco", 4.0),
    ("seoul kitchen", "korean", "Santa Clara", 4.3),
    ("kimchi house", "korean", "Oakland", 4.1),
    ("pho lotus", "vietnamese", "San Jose", 4.2),
    ("saigon corner", "vietnamese", "Milpitas", 3.9),
    ("olive and feta", "greek", "San Francisco", 4.0),
    ("athens taverna", "greek", "San Mateo", 3.8),
    ("morning crumb", "bakery", "Berkeley", 4.5),
    ("butter and flour", "bakery", "Petaluma", 4.2),
    ("smoke and oak", "barbecue", "Hayward", 4.1),
    ("pit stop barbecue", "barbecue", "Fremont", 3.7),
    ("cedar and vine", "mediterranean", "Napa", 4.4),
    ("olive grove", "mediterranean", "Santa Rosa", 4.0),
    ("napa", "american", "San Francisco", 4.3),
    ("sonoma", "american", "Oakland", 4.1),
    ("island thai", "thai", "Alameda", 3.8),
    ("parrot cove", "seafood", "Alameda", 4.0),
    ("webster street grill", "american", "Alameda", 3.5),
    ("the hungry owl", "american", "Novato", 3.6),
    ("redwood grill", "american", "Redwood City", 3.9),
    ("iron kettle", "american", "Martinez", 3.3),
    ("garden of siam", "thai", "San Rafael", 4.0),
    ("little lisbon", "mediterranean", "San Francisco", 4.1),
    ("mandarin cove", "chinese", "Palo Alto", 3.9),
    ("golden gate pho", "vietnamese", "San Francisco", 4.4),
    ("mission taco", "mexican", "San Francisco", 4.5),
    ("bay leaf", "indian", "San Mateo", 4.1),
    ("ocean pearl", "seafood", "Daly City", 3.8),
    ("rustic crust", "pizza", "Sonoma", 4.2),
    ("vine and barrel", "french", "Napa", 4.6),
    ("lotus vegan", "vegan", "Sunnyvale", 3.9),
    ("old oak bakery", "bakery", "Walnut Creek", 4.0),
    ("hilltop barbecue", "barbecue", "Richmond", 3.5),
    ("santorini blue", "greek", "San Jose", 4.2),
    ("hanoi street", "vietnamese", "Oakland", 4.0),
    ("casa azul", "mexican", "Napa", 3.8),
    ("gold rush diner", "american", "Concord", 3.2),
    ("emerald bay", "chinese", "Cupertino", 4.1),
    ("roma antica", "italian", "San Mateo", 4.3),
    ("spice route", "indian", "Mountain View", 4.4),
    ("noodle barn", "chinese", "Hayward", 3.4),
    ("the daily loaf", "bakery", "Palo Alto", 4.3),
    ("grill sixty six", "american", "Fremont", 3.7),
    ("ume and rice", "japanese", "Berkeley", 4.2),
    ("provence table", "french", "Santa Rosa", 4.3),
    ("alhambra nights", "mediterranean", "San Jose", 3.9),
    ("the green olive", "greek", "Sunnyvale", 3.7),
    ("tandoor flame", "indian", "Santa Clara", 4.0),
    ("pacific catch", "seafood", "San Rafael", 4.1),
    ("brick lane curry", "indian", "Daly City", 3.6),
    ("via napoli", "pizza", "Santa Clara", 4.0),
    ("sunset wok", "chinese", "Daly City", 3.7),
    ("marin farm table", "american", "San Rafael", 4.4),
    ("petaluma creamery", "bakery", "Petaluma", 4.1),
    ("vineyard bistro", "french", "Sonoma", 4.5),
    ("harvest moon", "vegan", "Berkeley", 4.1),
];

pub fn schema() -> &'static str {
    "restaurant,name,food:ref(food),loc:ref(city),rating:num!\n\
     city,name,county:ref(county)\n\
     county,name\n\
     food,name\n"
}

pub fn restaurant_csv() -> String {
    let mut out = String::from("name,food,loc,rating\n");
    for (name, food, city, rating) in RESTAURANTS {
        writeln!(out, "{name},{food},{city},{rating}").unwrap();
    }
    out
}

pub fn city_csv() -> String {
    let mut out = String::from("name,county\n");
    for (name, county) in CITIES {
        writeln!(out, "{name},{county}").unwrap();
    }
    // Two restaurant rows point at cities outside the core list.
    writeln!(out, "Milpitas,Santa Clara").unwrap();
    writeln!(out, "Concord,Contra Costa").unwrap();
    out
}

pub fn county_csv() -> String {
    let mut out = String::from("name\n");
    for name in COUNTIES {
        writeln!(out, "{name}").unwrap();
    }
    out
}

pub fn food_csv() -> String {
    let mut out = String::from("name\n");
    for name in FOODS {
        writeln!(out, "{name}").unwrap();
    }
    out
}

pub fn lexicon() -> &'static str {
    "how many\tcount\n\
     number of\tcount\n\
     best\trating\n\
     top rated\trating\n"
}

pub fn meta() -> &'static str {
    "# Constructor spellings that differ from the default `<table>id`.\n\
     [ctors]\n\
     restaurant = \"restid\"\n"
}

pub fn question_pool() -> Vec<(String, String)> {
    let mut pool = Vec::new();
    let cities: Vec<&str> = CITIES.iter().map(|c| c.0).collect();

    for c in &cities {
        pool.push((
            format!("what restaurants are in {c} ?"),
            format!("answer(A,(restaurant(A),loc(A,B),const(B,cityid({c}))))"),
        ));
        pool.push((
            format!("how many restaurants are in {c} ?"),
            format!("answer(A,count(B,(restaurant(B),loc(B,C),const(C,cityid({c}))),A))"),
        ));
        pool.push((
            format!("what is the best restaurant in {c} ?"),
            format!("answer(A,largest(B,(restaurant(A),loc(A,C),const(C,cityid({c})),rating(A,B))))"),
        ));
    }
    for f in FOODS {
        pool.push((
            format!("what restaurants serve {f} food ?"),
            format!("answer(A,(restaurant(A),food(A,B),const(B,foodid({f}))))"),
        ));
    }
    for (i, f) in FOODS.iter().enumerate() {
        // Pair each food with a rotating subset of cities.
        for c in cities.iter().skip(i % 3).step_by(3) {
            pool.push((
                format!("what {f} restaurants are in {c} ?"),
                format!(
                    "answer(A,(restaurant(A),food(A,B),const(B,foodid({f})),loc(A,C),const(C,cityid({c}))))"
                ),
            ));
            pool.push((
                format!("how many {f} restaurants are there in {c} ?"),
                format!(
                    "answer(A,count(B,(restaurant(B),food(B,C),const(C,foodid({f})),loc(B,D),const(D,cityid({c}))),A))"
                ),
            ));
        }
    }
    for (r, ..) in RESTAURANTS {
        pool.push((
            format!("what is the rating of {r} ?"),
            format!("answer(A,rating(B,A),const(B,restid({r})))"),
        ));
        pool.push((
            format!("what food does {r} serve ?"),
            format!("answer(A,food(B,A),const(B,restid({r})))"),
        ));
        pool.push((
            format!("where is {r} ?"),
            format!("answer(A,loc(B,A),const(B,restid({r})))"),
        ));
    }
    for co in COUNTIES {
        pool.push((
            format!("what cities are in {co} county ?"),
            format!("answer(A,(city(A),county(A,B),const(B,countyid({co}))))"),
        ));
        pool.push((
            format!("what restaurants are in {co} county ?"),
            format!(
                "answer(A,(restaurant(A),loc(A,B),city(B),county(B,C),const(C,countyid({co}))))"
            ),
        ));
        pool.push((
            format!("how many cities are in {co} county ?"),
            format!("answer(A,count(B,(city(B),county(B,C),const(C,countyid({co}))),A))"),
        ));
    }
    pool.push((
        "which city has the most restaurants ?".into(),
        "answer(A,most(A,B,(city(A),restaurant(B),loc(B,A))))".into(),
    ));
    pool
}
