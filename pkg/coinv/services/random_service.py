import random
from typing import List, Optional, Tuple

from loguru import logger

from coinv.algebra.abelian import FinAbGroup, generates
from coinv.algebra.zlinalg import invariant_factors_of_cyclic
from coinv.config import settings
from coinv.services.bv_service import OrderedBVDiagram, Tower, nondegeneracy_check
from coinv.services.presentation_service import CocycleData, Presentation

MAX_ATTEMPTS = 1000


class RandomDataError(Exception):
    """Random data generation error"""
    pass


def minimal_generator_count(G: FinAbGroup) -> int:
    """Number of invariant factors of G (at least 1)"""
    return max(1, len(invariant_factors_of_cyclic(G.moduli)))


class RandomDataService:
    """Seeded generators of cocycle data, diagrams and relation combinations"""

    def __init__(self, seed: Optional[int] = None):
        self.seed = settings.DEFAULT_SEED if seed is None else seed

    def rng(self, seed: Optional[int] = None) -> random.Random:
        return random.Random(self.seed if seed is None else seed)

    def random_cocycle_data(
        self,
        G: FinAbGroup,
        rng: random.Random,
        max_labels: Optional[int] = None,
    ) -> CocycleData:
        """
        Random (A, B, mu) with mu(A) and mu(B) generating G.

        Args:
            G: The group
            rng: Source of randomness
            max_labels: Upper bound on |A| and |B| (raised to the minimal generator count if needed)

        Raises:
            RandomDataError: If no generating images are found within the attempt limit
        """
        if max_labels is None:
            max_labels = settings.RANDOM_DATA_MAX_LABELS
        lo = minimal_generator_count(G)
        hi = max(lo, max_labels)
        elements = G.elements()

        def side(prefix: str) -> Tuple[List[str], dict]:
            for _ in range(MAX_ATTEMPTS):
                size = rng.randint(lo, hi)
                values = [rng.choice(elements) for _ in range(size)]
                if generates(values, G):
                    labels = [f"{prefix}{i}" for i in range(1, size + 1)]
                    return labels, dict(zip(labels, values))
            raise RandomDataError(f"No generating labels found for {G}")

        A, mu_a = side("a")
        B, mu_b = side("b")
        return CocycleData(G, A, B, mu_a, mu_b)

    def random_diagram(
        self,
        G: FinAbGroup,
        rng: random.Random,
        levels: int,
        max_towers: int = 4,
        max_height: int = 3,
        min_towers: int = 1,
    ) -> OrderedBVDiagram:
        """
        Random ordered diagram: level-1 towers with random cells, higher towers
        with random traversals that use every lower tower at least once.
        """
        names = [f"t{i}" for i in range(1, rng.randint(min_towers, max_towers) + 1)]
        elements = G.elements()
        first = tuple(
            Tower(name=v, cells=tuple(rng.choice(elements) for _ in range(rng.randint(1, max_height))))
            for v in names
        )
        built = [first]
        below = names
        for _ in range(1, levels):
            upper = [f"t{i}" for i in range(1, rng.randint(min_towers, max_towers) + 1)]
            traversals = {w: [] for w in upper}
            for v in below:
                traversals[rng.choice(upper)].append(v)
            for w in upper:
                extra = rng.randint(0 if traversals[w] else 1, 2)
                traversals[w].extend(rng.choice(below) for _ in range(extra))
                rng.shuffle(traversals[w])
            built.append(tuple(Tower(name=w, traversal=tuple(traversals[w])) for w in upper))
            below = upper
        return OrderedBVDiagram(G, tuple(built))

    def random_nondegenerate_diagram(self, G: FinAbGroup, rng: random.Random, levels: int) -> OrderedBVDiagram:
        """
        Raises:
            RandomDataError: If no non-degenerate diagram is found within the attempt limit
        """
        lo = minimal_generator_count(G)
        for attempt in range(MAX_ATTEMPTS):
            d = self.random_diagram(G, rng, levels, max_towers=max(4, lo), min_towers=lo)
            if nondegeneracy_check(d)[1]:
                logger.debug(f"Non-degenerate diagram over {G} after {attempt + 1} attempts")
                return d
        raise RandomDataError(f"No non-degenerate diagram over {G} found")

    def random_nondegenerate_pair(
        self, G: FinAbGroup, rng: random.Random, levels: int
    ) -> Tuple[OrderedBVDiagram, OrderedBVDiagram]:
        return (
            self.random_nondegenerate_diagram(G, rng, levels),
            self.random_nondegenerate_diagram(G, rng, levels),
        )

    def random_relation_combination(
        self, pres: Presentation, rng: random.Random, terms: int = 5, bound: int = 3
    ) -> List[int]:
        """Random integer combination of relation rows (an element of A + B)"""
        out = [0] * pres.basis.dim
        for _ in range(terms):
            row = rng.choice(pres.relation_rows)
            c = rng.randint(-bound, bound)
            for j, x in enumerate(row):
                if x:
                    out[j] += c * x
        return out


random_service = RandomDataService()
