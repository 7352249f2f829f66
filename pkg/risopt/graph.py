import logging

from langgraph.graph import StateGraph

from .classes import TrialInput, TrialState
from .nodes import SOLVERS, ChannelGenerator, Collector, LipschitzEstimator, Quantizer

logger = logging.getLogger(__name__)


class TrialGraph:
    """channels -> bounds -> selected solvers (parallel) -> quantizer -> collector."""

    def __init__(self):
        self._init_nodes()
        self._build_workflow()

    def _init_nodes(self):
        """Initialize all workflow nodes"""
        self.channels = ChannelGenerator()
        self.bounds = LipschitzEstimator()
        self.solvers = {name: solver() for name, solver in SOLVERS.items()}
        self.quantizer = Quantizer()
        self.collector = Collector()

    def _build_workflow(self):
        """Configure the state graph workflow"""
        self.workflow = StateGraph(TrialState, input=TrialInput)

        self.workflow.add_node("channels", self.channels.run)
        self.workflow.add_node("bounds", self.bounds.run)
        for name, solver in self.solvers.items():
            self.workflow.add_node(name, solver.run)
        self.workflow.add_node("quantizer", self.quantizer.run)
        self.workflow.add_node("collector", self.collector.run)

        self.workflow.set_entry_point("channels")
        self.workflow.set_finish_point("collector")

        self.workflow.add_edge("channels", "bounds")
        # Fan out to the configured algorithms only; they share one superstep
        self.workflow.add_conditional_edges("bounds", self._route_solvers, list(self.solvers))
        for name in self.solvers:
            self.workflow.add_edge(name, "quantizer")
        self.workflow.add_edge("quantizer", "collector")

    @staticmethod
    def _route_solvers(state: TrialState) -> list[str]:
        return list(dict.fromkeys(state["config"].algorithms))

    def compile(self):
        graph = self.workflow.compile()
        return graph
