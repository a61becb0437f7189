"""Bundled population data used when no language model is configured:
name parts, a discrete working-age distribution, and occupation titles
grouped by income decile (lowest decile first)."""

from __future__ import annotations

import numpy as np

FIRST_NAMES = [
    "Ava", "Noah", "Mia", "Liam", "Zoe", "Ethan", "Ruby", "Mason", "Isla",
    "Lucas", "Nora", "Henry", "Chloe", "Owen", "Hazel", "Levi", "Stella",
    "Caleb", "Violet", "Miles", "Aurora", "Jonah", "Ivy", "Felix", "Luna",
    "Oscar", "Daisy", "Hugo", "Pearl", "Silas", "Wren", "Jasper", "Iris",
    "Theo", "Clara", "Ezra", "Maeve", "Rowan", "Sadie", "Amos", "Greta",
    "Elias", "June", "Arthur", "Opal", "Reuben", "Flora", "Edwin", "Mabel",
    "Clyde", "Vera", "Harvey", "Elsie", "Victor", "Nina", "Walter", "Cora",
    "Hector", "Lena", "Marcus",
]

LAST_NAMES = [
    "Alvarez", "Brooks", "Carter", "Delgado", "Ellis", "Foster", "Garcia",
    "Hayes", "Ibrahim", "Jensen", "Kim", "Lopez", "Mercer", "Nguyen",
    "Ortiz", "Patel", "Quinn", "Reyes", "Singh", "Turner", "Ueda",
    "Vasquez", "Walsh", "Xu", "Young", "Zhang", "Okafor", "Novak",
    "Fitzgerald", "Moreau", "Kowalski", "Haddad", "Lindqvist", "Romano",
    "Tanaka", "Osei", "Petrov", "Silva", "Costa", "Berg",
]

# (low age, high age, weight): a coarse working-age pyramid, uniform within
# each band. Weights need not sum to 1; they are normalized at draw time.
AGE_BANDS = [
    (18, 24, 0.15),
    (25, 34, 0.26),
    (35, 44, 0.24),
    (45, 54, 0.21),
    (55, 60, 0.14),
]

# Ten titles per income decile, decile 0 = lowest earners.
OCCUPATIONS_BY_DECILE = [
    ["fast food worker", "dishwasher", "farm hand", "laundry attendant",
     "parking attendant", "ticket taker", "busser", "car wash attendant",
     "grocery bagger", "kitchen helper"],
    ["cashier", "housekeeper", "food prep worker", "childcare aide",
     "retail stocker", "home health aide", "janitor", "barista",
     "dry cleaning presser", "delivery runner"],
    ["retail salesperson", "security guard", "warehouse picker",
     "nursing assistant", "receptionist", "line cook", "groundskeeper",
     "bank teller", "teacher aide", "call center agent"],
    ["delivery driver", "medical assistant", "office clerk",
     "dental receptionist", "shipping coordinator", "pharmacy technician",
     "customer service rep", "school bus driver", "veterinary technician",
     "hotel front desk lead"],
    ["administrative assistant", "truck driver", "auto mechanic",
     "HVAC installer", "payroll clerk", "carpenter", "phlebotomist",
     "welder", "bookkeeper", "surgical technologist"],
    ["electrician", "paralegal", "machinist", "insurance agent",
     "graphic designer", "plumber", "real estate agent",
     "respiratory therapist", "executive assistant", "lab technician"],
    ["schoolteacher", "accountant", "dental hygienist", "web developer",
     "HR specialist", "construction supervisor", "police officer",
     "marketing coordinator", "radiologic technologist", "firefighter"],
    ["registered nurse", "project coordinator", "systems administrator",
     "financial analyst", "civil engineer", "physical therapist assistant",
     "sales manager", "technical writer", "operations analyst",
     "power plant operator"],
    ["software developer", "mechanical engineer", "nurse practitioner",
     "data scientist", "physician assistant", "IT manager",
     "construction manager", "actuary", "pharmacist", "electrical engineer"],
    ["physician", "corporate attorney", "engineering director",
     "investment banker", "surgeon", "software architect", "dentist",
     "finance director", "airline pilot", "chief marketing officer"],
]


def draw_age(rng: np.random.Generator) -> int:
    """One age from the banded working-age distribution."""
    weights = np.array([w for _, _, w in AGE_BANDS])
    band = rng.choice(len(AGE_BANDS), p=weights / weights.sum())
    lo, hi, _ = AGE_BANDS[band]
    return int(rng.integers(lo, hi + 1))


def draw_name(rng: np.random.Generator) -> str:
    first = FIRST_NAMES[int(rng.integers(len(FIRST_NAMES)))]
    last = LAST_NAMES[int(rng.integers(len(LAST_NAMES)))]
    return f"{first} {last}"


def occupation_for_decile(decile: int, rng: np.random.Generator) -> str:
    """One title from the given income decile (0 = lowest, 9 = highest)."""
    titles = OCCUPATIONS_BY_DECILE[min(9, max(0, decile))]
    return titles[int(rng.integers(len(titles)))]
