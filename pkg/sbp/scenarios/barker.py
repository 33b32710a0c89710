"""
A restaurant barker guesses what passers-by like to eat from what they
look like, then tries each guess out in a hypothetical copy of the world
before praising a dish. Ada looks English but is a vegetarian; once she
hears a meat dish praised she tells the barker, who then offers her
something she actually likes.
"""
from dataclasses import dataclass
from typing import Tuple

from ..values import Coord, EntityRef, WorldRef
from .base import document, entity, macro, tdl

WATCH_PEOPLE = """\
wait(randomValue(1..%(watch_wait)d))
select en in myworld where contains(en.types, "human") and en.eatingHabits == "unknown" and distance(en.loc, me.loc) <= %(watch_range)s {
    let country = en.looksLike
    let prototype = myworld[country].inhPrototype
    return {setEatingHabits(myworld, en, myworld, prototype), setPotentialCustomer(en)}
}
"""

MAKE_OFFER = """\
wait(%(offer_wait)d)
select cus in myworld where cus == me.potentialCustomer {
    # Try the menu on a hypothetical copy of the customer first.
    emit {
        add_world world("hyp") from myworld,
        set_data world("hyp")[cus].availableFood = me.restaurantFood,
        cancel_process world("hyp").barker.watch,
        cancel_process world("hyp").barker.offer,
        start_process world("hyp")[cus].dinner <- "chooseFood"
    }
    await world("hyp")[cus].dinner
    let food = world("hyp")[cus].selectedFood
    return {praiseFood(food), delete_world world("hyp")}
}
"""

CHOOSE_FOOD = """\
if contains(me.availableFood, me.favourite) {
    return stop {set_data me.selectedFood = me.favourite}
}
return stop {set_data me.selectedFood = me.availableFood[0]}
"""

EXPLAIN_EATING_HABITS = """\
wait(1)
let pers = world(me.partnerWorld)[me.partner]
if exists(pers.lastOffer) and contains(myworld.cuisine.meatDishes, pers.lastOffer) {
    return stop {setEatingHabits(me.partnerWorld, me, myworld, me)}
}
"""

MACROS = {
    "setEatingHabits": macro(
        ["dstW", "dst", "srcW", "src"],
        'copy_properties world($srcW)[$src] -> world($dstW)[$dst] only ["diet", "favourite", "eatingHabits", "chooseFood"]',
    ),
    "setPotentialCustomer": macro(["p"], "set_data me.potentialCustomer = $p"),
    "praiseFood": macro(
        ["food"],
        "set_data me.offers = me.offers + [$food]",
        "set_data me.lastOffer = $food",
    ),
}


@dataclass(frozen=True)
class BarkerParams:
    restaurant_food: Tuple[str, ...] = ("blood pudding", "vegetable curry", "fish and chips")
    meat_dishes: Tuple[str, ...] = ("blood pudding", "fish and chips")
    watch_wait: int = 5
    watch_range: float = 2.0
    offer_wait: int = 2
    street: str = "w_barker"
    home: str = "w_ada"


def build_barker(params=None):
    params = params or BarkerParams()
    waits = {
        "watch_wait": params.watch_wait,
        "watch_range": repr(float(params.watch_range)),
        "offer_wait": params.offer_wait,
    }
    choose_food = tdl(CHOOSE_FOOD)
    street = {
        "barker": entity(
            data={
                "loc": Coord(0, 0),
                "types": ("human", "waiter"),
                "restaurantFood": tuple(params.restaurant_food),
                "offers": (),
            },
            transitions={
                "watchPeople": tdl(WATCH_PEOPLE % waits),
                "makeOffer": tdl(MAKE_OFFER % waits),
            },
            processes={"watch": "watchPeople", "offer": "makeOffer"},
        ),
        "ada": entity(
            data={
                "loc": Coord(1, 0),
                "types": ("human",),
                "eatingHabits": "unknown",
                "looksLike": "england",
            },
        ),
        "england": entity(data={"inhPrototype": EntityRef("englishPerson")}),
        "englishPerson": entity(
            data={"favourite": "blood pudding", "diet": "omnivore", "eatingHabits": "english"},
            transitions={"chooseFood": choose_food},
        ),
    }
    home = {
        "ada": entity(
            data={
                "favourite": "vegetable curry",
                "diet": "vegetarian",
                "eatingHabits": "vegetarian",
                "partner": EntityRef("barker"),
                "partnerWorld": WorldRef(params.street),
            },
            transitions={
                "chooseFood": choose_food,
                "explainEatingHabits": tdl(EXPLAIN_EATING_HABITS),
            },
            processes={"explain": "explainEatingHabits"},
        ),
        "cuisine": entity(data={"meatDishes": tuple(params.meat_dishes)}),
    }
    return document({params.street: street, params.home: home}, macros=MACROS)
