"""
First variations along two harmonics, each repeated with half the step.

From this directory::

    PYTHONPATH=. lcflow verify --config perturbed.conf --suite variation_suite:VariationSuite
"""

from lcflow import SuiteBuilder, SuiteContext, SuiteDefinition, check
from lcflow.verification import check_variation


class VariationSuite(SuiteDefinition):
    description = "First variations with step refinement"

    def define_suite(self, builder: SuiteBuilder):
        with builder.transform(self.step_size) as sized:
            sized.expected_arguments(eps=float)
            for b in sized.each(self.directions):
                b.check(self.variation)
                with b.transform(self.halved) as refined:
                    refined.check(self.variation)

    @staticmethod
    def step_size(eps: float = 1e-3, **_):
        return {"eps": eps}

    @staticmethod
    def directions(eps: float):
        for degree, order in ((2, 0), (3, 1)):
            yield {"degree": degree, "order": order, "eps": eps}, f"Y_{degree},{order}"

    @staticmethod
    def halved(eps: float, **kwargs):
        return {**kwargs, "eps": eps / 2}, "halved step"

    @check
    def variation(self, context: SuiteContext, degree: int, order: int, eps: float):
        phi = context.grid.ylm(degree, order)
        report = check_variation(context.omega, phi, eps, context.tolerances.variation)
        return report.model_copy(update={"name": f"variation_{degree}_{order}"})
