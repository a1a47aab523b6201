"""
Core modules - surface kinematics, graphene material, NURBS discretization,
finite element assembly and substrate contact
"""
